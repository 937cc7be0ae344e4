#include "safe/elevation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "safe/error.hpp"

namespace safe {
namespace {

constexpr double kMinHeight = -500.0;
constexpr double kMaxHeight = 9000.0;
constexpr double kMetresPerDegreeLat = 110574.0;
constexpr double kMetresPerDegreeLonEquator = 111320.0;
constexpr int kUnitMetre = 9001;

}  // namespace

ElevationGrid::ElevationGrid(GridKind kind, Crs crs, GeoTransform transform, std::size_t width, std::size_t height,
                             std::vector<double> heights, std::optional<double> nodata)
    : kind_(kind),
      crs_(std::move(crs)),
      transform_(transform),
      width_(width),
      height_(height),
      heights_(std::move(heights)),
      nodata_(nodata) {
  if (width_ == 0 || height_ == 0 || heights_.size() != width_ * height_) {
    fail(Errc::MalformedRaster, "grid dimensions do not match the height array");
  }
  const double a = transform_.pixel_width, b = transform_.row_rotation;
  const double e = transform_.col_rotation, f = transform_.pixel_height;
  const double det = a * f - b * e;
  if (!std::isfinite(det) || std::abs(det) < 1e-300) fail(Errc::MalformedRaster, "grid transform is not invertible");
  inverse_ = {f / det, -b / det, -e / det, a / det, transform_.origin_x, transform_.origin_y};

  const double rx = std::hypot(a, e);
  const double ry = std::hypot(b, f);
  if (crs_.kind() == Crs::Kind::Geographic) {
    const double lat_c = transform_.origin_y + 0.5 * (e * width_ + f * height_);
    resolution_ = {rx * kMetresPerDegreeLonEquator * std::cos(lat_c * M_PI / 180.0), ry * kMetresPerDegreeLat};
  } else {
    resolution_ = {rx, ry};
  }
  if (!(resolution_.first > 0.0) || !(resolution_.second > 0.0)) {
    fail(Errc::MalformedRaster, "grid resolution must be positive");
  }
  for (double h : heights_) {
    if (is_nodata(h)) continue;
    if (!std::isfinite(h) || h < kMinHeight || h > kMaxHeight) {
      fail(Errc::MalformedRaster, "height " + std::to_string(h) + " m outside [-500, 9000]");
    }
  }
}

ElevationGrid ElevationGrid::from_raster(const RasterData& raster, GridKind kind) {
  if (!raster.transform) fail(Errc::MalformedRaster, "raster has no georeferencing transform");
  if (raster.epsg == 0) fail(Errc::MalformedRaster, "raster declares no coordinate system");
  if (raster.vertical_units && *raster.vertical_units != kUnitMetre) {
    fail(Errc::UnitError, "vertical units code " + std::to_string(*raster.vertical_units) + " is not metres");
  }
  return ElevationGrid(kind, Crs::from_epsg(raster.epsg), *raster.transform, raster.width, raster.height,
                       raster.values, raster.nodata);
}

bool ElevationGrid::is_nodata(double v) const noexcept {
  if (std::isnan(v)) return true;
  return nodata_ && *nodata_ == v;
}

PlanarPoint ElevationGrid::world_to_pixel(PlanarPoint w) const noexcept {
  const double dx = w.x - inverse_[4];
  const double dy = w.y - inverse_[5];
  return {inverse_[0] * dx + inverse_[1] * dy, inverse_[2] * dx + inverse_[3] * dy};
}

PlanarPoint ElevationGrid::pixel_to_world(PlanarPoint px) const noexcept {
  const GeoTransform& t = transform_;
  return {t.origin_x + px.x * t.pixel_width + px.y * t.row_rotation,
          t.origin_y + px.x * t.col_rotation + px.y * t.pixel_height};
}

std::optional<double> ElevationGrid::sample(LatLon p) const { return sample_planar(crs_.forward(p)); }

std::optional<double> ElevationGrid::sample_planar(PlanarPoint world) const {
  const PlanarPoint px = world_to_pixel(world);
  const double w = static_cast<double>(width_);
  const double h = static_cast<double>(height_);
  if (!(px.x >= 0.0 && px.x <= w && px.y >= 0.0 && px.y <= h)) return std::nullopt;

  // Cell-centre coordinates; the outer half pixel replicates the edge cells.
  const double u = std::clamp(px.x - 0.5, 0.0, w - 1.0);
  const double v = std::clamp(px.y - 0.5, 0.0, h - 1.0);
  const std::size_t c0 = width_ > 1 ? std::min(static_cast<std::size_t>(u), width_ - 2) : 0;
  const std::size_t r0 = height_ > 1 ? std::min(static_cast<std::size_t>(v), height_ - 2) : 0;
  const double fx = u - static_cast<double>(c0);
  const double fy = v - static_cast<double>(r0);
  const std::size_t c1 = width_ > 1 ? c0 + 1 : c0;
  const std::size_t r1 = height_ > 1 ? r0 + 1 : r0;

  const std::array<double, 4> weights{(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  const std::array<double, 4> values{at(c0, r0), at(c1, r0), at(c0, r1), at(c1, r1)};
  for (std::size_t i = 0; i < 4; ++i) {
    if (weights[i] != 0.0 && is_nodata(values[i])) return std::nullopt;
  }
  // Nested linear steps reproduce equal neighbours exactly; a zero-weight
  // corner (possibly nodata) never enters the sum.
  auto lerp = [](double a, double b, double t) { return t == 0.0 ? a : t == 1.0 ? b : a + t * (b - a); };
  const double top = lerp(values[0], values[1], fx);
  if (fy == 0.0) return top;
  const double bottom = lerp(values[2], values[3], fx);
  return fy == 1.0 ? bottom : top + fy * (bottom - top);
}

ElevationGrid load_grid(const std::filesystem::path& path, GridKind kind) {
  return ElevationGrid::from_raster(read_geotiff(path), kind);
}

ElevationStack::ElevationStack(std::shared_ptr<const ElevationGrid> dtm, std::shared_ptr<const ElevationGrid> dsm,
                               std::shared_ptr<const ElevationGrid> fallback_dtm, double tree_growth_offset)
    : dtm_(std::move(dtm)), dsm_(std::move(dsm)), fallback_(std::move(fallback_dtm)),
      tree_growth_offset_(tree_growth_offset) {
  if (!dtm_ || !dsm_) fail(Errc::InvalidParameter, "elevation stack needs both a DTM and a DSM");
  if (dtm_->kind() != GridKind::Terrain) fail(Errc::InvalidParameter, "DTM grid must be of kind Terrain");
  if (dsm_->kind() != GridKind::Surface) fail(Errc::InvalidParameter, "DSM grid must be of kind Surface");
  if (fallback_ && fallback_->kind() != GridKind::Terrain) {
    fail(Errc::InvalidParameter, "fallback grid must be of kind Terrain");
  }
  if (!(tree_growth_offset_ >= 0.0)) fail(Errc::NegativeInput, "tree growth offset must be >= 0");
}

namespace {

std::optional<double> try_sample(const ElevationGrid& g, LatLon p) {
  try {
    return g.sample(p);
  } catch (const Error& e) {
    if (e.code() == Errc::TransformFailure) return std::nullopt;
    throw;
  }
}

}  // namespace

ColumnSample ElevationStack::column_at(LatLon p) const {
  ColumnSample c;
  if (const auto terrain = try_sample(*dtm_, p)) {
    c.terrain_m = *terrain;
    c.high_resolution = true;
    if (const auto surface = try_sample(*dsm_, p)) {
      c.clutter_m = std::max((*surface - *terrain) - tree_growth_offset_, 0.0);
    }
    return c;
  }
  if (fallback_) {
    if (const auto h = try_sample(*fallback_, p)) {
      c.terrain_m = *h;
      return c;
    }
  }
  fail(Errc::NoCoverage, "no terrain coverage at " + std::to_string(p.lat) + "," + std::to_string(p.lon));
}

double ElevationStack::terrain_height_at(LatLon p) const { return column_at(p).terrain_m; }

double ElevationStack::clutter_height_at(LatLon p) const { return column_at(p).clutter_m; }

bool ElevationStack::has_high_resolution(LatLon p) const { return try_sample(*dtm_, p).has_value(); }

ElevationStack ElevationStack::apply_tree_growth(double rate_m_per_year, double years) const {
  if (!(rate_m_per_year >= 0.0) || !(years >= 0.0)) {
    fail(Errc::NegativeInput, "tree growth rate and years must be >= 0");
  }
  return ElevationStack(dtm_, dsm_, fallback_, rate_m_per_year * years);
}

}  // namespace safe
