#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "safe/elevation.hpp"
#include "safe/p1812.hpp"
#include "safe/profile.hpp"
#include "safe/ret.hpp"

namespace safe {

enum class PredictionMode { Safe, P1812Clutter, P1812NoClutter };

std::string_view to_string(PredictionMode m);
PredictionMode parse_prediction_mode(std::string_view s);  // "safe", "p1812-clutter", "p1812-no-clutter"

struct SafeConfig {
  PredictionMode mode = PredictionMode::Safe;
  ClutterClass clutter_class = ClutterClass::standard(ClutterCategory::UrbanTreesForest);
  RetParameters ret_params = RetParameters::american_plane_in_leaf();
  RetLimit ret_limit = RetLimit::semi_rural();
  ModelEnvironment environment;
  double detection_threshold_m = kDefaultDetectionThresholdM;
  double profile_spacing_m = kDefaultProfileSpacingM;
  double intersection_step_m = kDefaultIntersectionStepM;
  double rx_height_m = 2.5;  // receiver height for grid predictions

  static SafeConfig semi_rural();
  static SafeConfig heavily_forested();

  void validate() const;  // InvalidParameter, NonpositiveStep
};

struct PredictionResult {
  double pl_safe_db = 0.0;
  double pl_p1812_no_clutter_db = 0.0;
  std::optional<double> pl_p1812_with_clutter_db;
  double ret_loss_raw_db = 0.0;
  double ret_loss_clamped_db = 0.0;
  double foliage_depth_m = 0.0;
  std::optional<double> theta_deg;
  double path_length_km = 0.0;
  std::size_t n_profile_points = 0;
  bool fallback_used = false;  // part of the ray only had coarse terrain
};

// Limit-independent pieces of one link. Sweeps over the RET limit reuse these
// instead of recomputing profiles and ray intersections.
struct LinkEvaluation {
  double pl_no_clutter_db = 0.0;
  std::optional<double> pl_with_clutter_db;
  double ret_loss_raw_db = 0.0;
  FoliageIntersection foliage;
  double path_length_km = 0.0;
  std::size_t n_profile_points = 0;
};

// Computes the terms `config.mode` needs.
LinkEvaluation evaluate_link(const ElevationStack& stack, const LinkParams& link, const SafeConfig& config);

// Applies the mode and the RET limit to an evaluation.
PredictionResult combine(const LinkEvaluation& eval, PredictionMode mode, RetLimit limit);

PredictionResult predict(const ElevationStack& stack, const LinkParams& link, const SafeConfig& config);

struct Transmitter {
  LatLon position;
  double height_m = 0.0;
  double frequency_mhz = 0.0;
  Polarization polarization = Polarization::Vertical;
};

struct BoundingBox {
  double south = 0.0;
  double west = 0.0;
  double north = 0.0;
  double east = 0.0;
};

enum class CellStatus { Ok, OutOfDomain, NoCoverage };

std::string_view to_string(CellStatus s);

struct GridCell {
  LatLon center;
  CellStatus status = CellStatus::Ok;
  std::optional<PredictionResult> result;
};

// Cells tile the box from its north-west corner; row 0 is the northernmost.
struct CoverageGrid {
  BoundingBox region;
  double resolution_m = 0.0;
  double lat_step_deg = 0.0;
  double lon_step_deg = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<GridCell> cells;  // row-major

  const GridCell& at(std::size_t row, std::size_t col) const { return cells[row * cols + col]; }
};

// One prediction per cell centre with rx height from the config. Cells under
// the minimum path length are OutOfDomain; cells without terrain are
// NoCoverage. EmptyRegion for a degenerate box, InvalidParameter for a
// nonpositive resolution. `threads` = 0 uses the hardware concurrency;
// the result does not depend on it.
CoverageGrid predict_grid(const ElevationStack& stack, const Transmitter& tx, const BoundingBox& region,
                          double resolution_m, const SafeConfig& config, std::size_t threads = 0);

}  // namespace safe
