#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "safe/crs.hpp"
#include "safe/geodesy.hpp"
#include "safe/raster.hpp"

namespace safe {

enum class GridKind { Terrain, Surface };

// Immutable georeferenced height field (metres above sea level).
class ElevationGrid {
 public:
  // Validates the invariants: positive resolution, invertible transform and
  // every non-nodata height finite within [-500, 9000] m.
  ElevationGrid(GridKind kind, Crs crs, GeoTransform transform, std::size_t width, std::size_t height,
                std::vector<double> heights, std::optional<double> nodata = std::nullopt);

  // Builds a grid from raster file contents; MalformedRaster when the raster
  // lacks a transform or coordinate system, UnitError for non-metre heights.
  static ElevationGrid from_raster(const RasterData& raster, GridKind kind);

  GridKind kind() const noexcept { return kind_; }
  const Crs& crs() const noexcept { return crs_; }
  const GeoTransform& transform() const noexcept { return transform_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::optional<double> nodata() const noexcept { return nodata_; }
  // Metres per pixel along x and y (approximate at the grid centre for
  // geographic grids).
  std::pair<double, double> resolution() const noexcept { return resolution_; }

  double at(std::size_t col, std::size_t row) const { return heights_[row * width_ + col]; }
  bool is_nodata(double v) const noexcept;

  // Bilinear interpolation between the four surrounding cell centres.
  // std::nullopt when the point is outside the raster or any cell with a
  // nonzero weight is nodata. Throws TransformFailure.
  std::optional<double> sample(LatLon p) const;
  std::optional<double> sample_planar(PlanarPoint p) const;

  PlanarPoint world_to_pixel(PlanarPoint world) const noexcept;
  PlanarPoint pixel_to_world(PlanarPoint pixel) const noexcept;

 private:
  GridKind kind_;
  Crs crs_;
  GeoTransform transform_;
  std::array<double, 6> inverse_{};
  std::size_t width_;
  std::size_t height_;
  std::vector<double> heights_;
  std::optional<double> nodata_;
  std::pair<double, double> resolution_{};
};

ElevationGrid load_grid(const std::filesystem::path& path, GridKind kind);

struct ColumnSample {
  double terrain_m = 0.0;
  double clutter_m = 0.0;  // max(DSM - offset - DTM, 0)
  bool high_resolution = false;
};

// DTM + DSM with an optional coarse terrain fallback. Grids are shared and
// immutable, so copies of a stack are cheap.
class ElevationStack {
 public:
  ElevationStack(std::shared_ptr<const ElevationGrid> dtm, std::shared_ptr<const ElevationGrid> dsm,
                 std::shared_ptr<const ElevationGrid> fallback_dtm = nullptr, double tree_growth_offset = 0.0);

  const ElevationGrid& dtm() const noexcept { return *dtm_; }
  const ElevationGrid& dsm() const noexcept { return *dsm_; }
  const ElevationGrid* fallback_dtm() const noexcept { return fallback_.get(); }
  double tree_growth_offset() const noexcept { return tree_growth_offset_; }

  // High-resolution DTM sample, else the fallback; NoCoverage otherwise.
  double terrain_height_at(LatLon p) const;

  // max(DSM - offset - DTM, 0). Zero where only the fallback covers the point
  // or the DSM is nodata; NoCoverage when no terrain grid covers it.
  double clutter_height_at(LatLon p) const;

  // True when the high-resolution DTM covers the point.
  bool has_high_resolution(LatLon p) const;

  // Terrain, clutter and coverage in one lookup. NoCoverage as above.
  ColumnSample column_at(LatLon p) const;

  // Copy of this stack carrying offset = rate * years. NegativeInput when
  // either argument is negative.
  ElevationStack apply_tree_growth(double rate_m_per_year, double years) const;

 private:
  std::shared_ptr<const ElevationGrid> dtm_;
  std::shared_ptr<const ElevationGrid> dsm_;
  std::shared_ptr<const ElevationGrid> fallback_;
  double tree_growth_offset_ = 0.0;
};

}  // namespace safe
