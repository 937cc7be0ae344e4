#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "safe/elevation.hpp"
#include "safe/predictor.hpp"
#include "safe/validation.hpp"

namespace safe::synth {

// Height as a function of metres east / north of the grid's north-west corner.
using HeightFn = std::function<double(double east_m, double north_m)>;

inline constexpr double kMetresPerDegreeLonEquator = 111319.49079327357;
inline constexpr double kMetresPerDegreeLatEquator = 110574.27582159436;

// EPSG:4326 grid near the equator whose cells are `cell_m` metres square.
// `north` in the height function grows northwards, so rows sit at negative
// values.
std::shared_ptr<const ElevationGrid> equatorial_grid(GridKind kind, LatLon north_west, double cell_m,
                                                     std::size_t width, std::size_t height, const HeightFn& fn);

// Converts metres east / north of `origin` to coordinates, using the
// equatorial degree lengths of equatorial_grid.
LatLon equatorial_offset(LatLon origin, double east_m, double north_m);

// UTM (northern hemisphere) grid; the height function receives absolute
// easting / northing of each cell centre.
std::shared_ptr<const ElevationGrid> utm_grid(GridKind kind, int zone, double west_easting, double north_northing,
                                              double cell_m, std::size_t width, std::size_t height,
                                              const HeightFn& fn);

std::shared_ptr<const ElevationGrid> constant_grid(GridKind kind, double value, LatLon north_west = {0.001, 0.0},
                                                   double cell_m = 10.0, std::size_t size = 200);

// Rolling terrain with patchy forest on a 5 m UTM grid around a fixed site.
struct ForestScene {
  ElevationStack stack;
  Crs crs;
  double centre_easting = 0.0;
  double centre_northing = 0.0;
  double extent_m = 0.0;
  Transmitter tx;

  LatLon at(double east_offset_m, double north_offset_m) const;
};

ForestScene make_forest_scene(std::uint32_t seed = 7, double extent_m = 3000.0, double cell_m = 5.0);

struct SyntheticDrive {
  std::vector<MeasurementRecord> records;
  std::vector<double> cell_noise_db;  // one shadowing draw per geohash cell
};

// Measurements equal to the SAFE prediction plus Gaussian shadowing drawn
// once per geohash-8 cell, `per_cell` records in each of `cells` cells
// between `min_range_m` and `max_range_m` of the transmitter.
SyntheticDrive make_drive(const ForestScene& scene, const SafeConfig& config, std::size_t cells, std::size_t per_cell,
                          double sigma_db, std::uint32_t seed, double min_range_m = 400.0,
                          double max_range_m = 1300.0);

}  // namespace safe::synth
