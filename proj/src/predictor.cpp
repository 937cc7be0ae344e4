#include "safe/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "safe/error.hpp"
#include "safe/parallel.hpp"

namespace safe {

std::string_view to_string(PredictionMode m) {
  switch (m) {
    case PredictionMode::Safe: return "safe";
    case PredictionMode::P1812Clutter: return "p1812-clutter";
    case PredictionMode::P1812NoClutter: return "p1812-no-clutter";
  }
  return "?";
}

PredictionMode parse_prediction_mode(std::string_view s) {
  if (s == "safe") return PredictionMode::Safe;
  if (s == "p1812-clutter") return PredictionMode::P1812Clutter;
  if (s == "p1812-no-clutter") return PredictionMode::P1812NoClutter;
  fail(Errc::ParseError, "unknown prediction mode '" + std::string(s) + "'");
}

std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::Ok: return "ok";
    case CellStatus::OutOfDomain: return "out-of-domain";
    case CellStatus::NoCoverage: return "no-coverage";
  }
  return "?";
}

SafeConfig SafeConfig::semi_rural() { return SafeConfig{}; }

SafeConfig SafeConfig::heavily_forested() {
  SafeConfig c;
  c.ret_limit = RetLimit::heavily_forested();
  return c;
}

void SafeConfig::validate() const {
  environment.validate();
  if (!(ret_limit.limit_db >= 0.0)) fail(Errc::InvalidParameter, "RET limit must be >= 0");
  if (!(detection_threshold_m > 0.0)) fail(Errc::InvalidParameter, "detection threshold must be > 0");
  if (!(profile_spacing_m > 0.0)) fail(Errc::NonpositiveStep, "profile spacing must be > 0");
  if (!(intersection_step_m > 0.0)) fail(Errc::NonpositiveStep, "intersection step must be > 0");
  if (!(rx_height_m > 0.0 && rx_height_m <= 3000.0)) fail(Errc::HeightOutOfRange, "rx height must be in (0, 3000] m");
  if (!(clutter_class.representative_height_m >= 0.0)) {
    fail(Errc::InvalidParameter, "representative clutter height must be >= 0");
  }
}

LinkEvaluation evaluate_link(const ElevationStack& stack, const LinkParams& link, const SafeConfig& config) {
  link.validate();
  const RawProfile raw = extract_profile(stack, link.tx, link.rx, config.profile_spacing_m);
  const PathProfile classified = classify_clutter(raw, config.clutter_class, config.detection_threshold_m);

  LinkEvaluation eval;
  eval.path_length_km = raw.length_km();
  eval.n_profile_points = raw.size();
  eval.pl_no_clutter_db = path_loss_p1812(strip_clutter(classified), link, config.environment);
  if (config.mode == PredictionMode::P1812Clutter) {
    eval.pl_with_clutter_db = path_loss_p1812(classified, link, config.environment);
  }
  if (config.mode == PredictionMode::Safe) {
    eval.foliage = intersect_ray_with_clutter(stack, Terminal{link.tx, link.tx_height_m},
                                              Terminal{link.rx, link.rx_height_m}, config.intersection_step_m);
    eval.ret_loss_raw_db = ret_loss(config.ret_params, eval.foliage.total_depth_m, eval.foliage.theta_deg.value_or(0.0));
  }
  return eval;
}

PredictionResult combine(const LinkEvaluation& eval, PredictionMode mode, RetLimit limit) {
  PredictionResult r;
  r.pl_p1812_no_clutter_db = eval.pl_no_clutter_db;
  r.pl_p1812_with_clutter_db = eval.pl_with_clutter_db;
  r.path_length_km = eval.path_length_km;
  r.n_profile_points = eval.n_profile_points;
  switch (mode) {
    case PredictionMode::Safe:
      r.ret_loss_raw_db = eval.ret_loss_raw_db;
      r.ret_loss_clamped_db = clamp_ret(eval.ret_loss_raw_db, limit);
      r.foliage_depth_m = eval.foliage.total_depth_m;
      r.theta_deg = eval.foliage.theta_deg;
      r.fallback_used = eval.foliage.fallback_used;
      r.pl_safe_db = r.pl_p1812_no_clutter_db + r.ret_loss_clamped_db;
      break;
    case PredictionMode::P1812NoClutter:
      r.pl_safe_db = r.pl_p1812_no_clutter_db;
      break;
    case PredictionMode::P1812Clutter:
      if (!eval.pl_with_clutter_db) fail(Errc::InvalidParameter, "evaluation lacks the clutter baseline");
      r.pl_safe_db = *eval.pl_with_clutter_db;
      break;
  }
  return r;
}

PredictionResult predict(const ElevationStack& stack, const LinkParams& link, const SafeConfig& config) {
  config.validate();
  return combine(evaluate_link(stack, link, config), config.mode, config.ret_limit);
}

CoverageGrid predict_grid(const ElevationStack& stack, const Transmitter& tx, const BoundingBox& region,
                          double resolution_m, const SafeConfig& config, std::size_t threads) {
  if (!(resolution_m > 0.0)) fail(Errc::InvalidParameter, "grid resolution must be > 0");
  if (!(region.north > region.south) || !(region.east > region.west)) {
    fail(Errc::EmptyRegion, "region has no area");
  }
  if (region.south < -90.0 || region.north > 90.0 || region.west < -180.0 || region.east > 180.0) {
    fail(Errc::CoordinateOutOfRange, "region outside valid coordinates");
  }
  config.validate();

  CoverageGrid grid;
  grid.region = region;
  grid.resolution_m = resolution_m;
  const LatLon mid{0.5 * (region.south + region.north), 0.5 * (region.west + region.east)};
  grid.lat_step_deg = std::abs(geodesic_direct(mid, 0.0, resolution_m).lat - mid.lat);
  grid.lon_step_deg = std::abs(geodesic_direct(mid, 90.0, resolution_m).lon - mid.lon);
  grid.rows = static_cast<std::size_t>(std::max(1.0, std::ceil((region.north - region.south) / grid.lat_step_deg - 1e-9)));
  grid.cols = static_cast<std::size_t>(std::max(1.0, std::ceil((region.east - region.west) / grid.lon_step_deg - 1e-9)));
  grid.cells.resize(grid.rows * grid.cols);

  LinkParams base;
  base.frequency_mhz = tx.frequency_mhz;
  base.tx_height_m = tx.height_m;
  base.rx_height_m = config.rx_height_m;
  base.tx = tx.position;
  base.polarization = tx.polarization;
  base.rx = tx.position;
  base.validate();

  parallel_for(grid.cells.size(), threads, [&](std::size_t i) {
    GridCell& cell = grid.cells[i];
    const std::size_t row = i / grid.cols;
    const std::size_t col = i % grid.cols;
    cell.center = {region.north - (static_cast<double>(row) + 0.5) * grid.lat_step_deg,
                   region.west + (static_cast<double>(col) + 0.5) * grid.lon_step_deg};
    LinkParams link = base;
    link.rx = cell.center;
    try {
      cell.result = predict(stack, link, config);
    } catch (const Error& e) {
      switch (e.code()) {
        case Errc::PathTooShort:
        case Errc::DistanceOutOfRange:
        case Errc::DegenerateLink: cell.status = CellStatus::OutOfDomain; break;
        case Errc::NoCoverage: cell.status = CellStatus::NoCoverage; break;
        default: throw;
      }
    }
  });
  return grid;
}

}  // namespace safe
