#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "safe/geohash.hpp"

namespace safe::synth {

namespace {

std::shared_ptr<const ElevationGrid> build(GridKind kind, Crs crs, GeoTransform t, std::size_t w, std::size_t h,
                                           const std::function<double(std::size_t, std::size_t)>& cell) {
  std::vector<double> v(w * h);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) v[r * w + c] = cell(c, r);
  }
  return std::make_shared<const ElevationGrid>(kind, std::move(crs), t, w, h, std::move(v));
}

// Smooth value noise in [0, 1) on a square lattice.
class ValueNoise {
 public:
  ValueNoise(std::uint32_t seed, double spacing_m, std::size_t n) : spacing_(spacing_m), n_(n), v_(n * n) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& x : v_) x = u(rng);
  }

  double operator()(double x_m, double y_m) const {
    const double fx = std::clamp(x_m / spacing_, 0.0, static_cast<double>(n_ - 1) - 1e-9);
    const double fy = std::clamp(y_m / spacing_, 0.0, static_cast<double>(n_ - 1) - 1e-9);
    const auto ix = static_cast<std::size_t>(fx);
    const auto iy = static_cast<std::size_t>(fy);
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    const double tx = smooth(fx - ix), ty = smooth(fy - iy);
    auto at = [&](std::size_t i, std::size_t j) { return v_[j * n_ + i]; };
    return (1 - ty) * ((1 - tx) * at(ix, iy) + tx * at(ix + 1, iy)) + ty * ((1 - tx) * at(ix, iy + 1) + tx * at(ix + 1, iy + 1));
  }

 private:
  double spacing_;
  std::size_t n_;
  std::vector<double> v_;
};

}  // namespace

LatLon equatorial_offset(LatLon origin, double east_m, double north_m) {
  return {origin.lat + north_m / kMetresPerDegreeLatEquator, origin.lon + east_m / kMetresPerDegreeLonEquator};
}

std::shared_ptr<const ElevationGrid> equatorial_grid(GridKind kind, LatLon north_west, double cell_m,
                                                     std::size_t width, std::size_t height, const HeightFn& fn) {
  GeoTransform t;
  t.origin_x = north_west.lon;
  t.origin_y = north_west.lat;
  t.pixel_width = cell_m / kMetresPerDegreeLonEquator;
  t.pixel_height = -cell_m / kMetresPerDegreeLatEquator;
  return build(kind, Crs::geographic(), t, width, height, [&](std::size_t c, std::size_t r) {
    return fn((static_cast<double>(c) + 0.5) * cell_m, -(static_cast<double>(r) + 0.5) * cell_m);
  });
}

std::shared_ptr<const ElevationGrid> utm_grid(GridKind kind, int zone, double west_easting, double north_northing,
                                              double cell_m, std::size_t width, std::size_t height,
                                              const HeightFn& fn) {
  GeoTransform t;
  t.origin_x = west_easting;
  t.origin_y = north_northing;
  t.pixel_width = cell_m;
  t.pixel_height = -cell_m;
  return build(kind, Crs::utm(zone, false), t, width, height, [&](std::size_t c, std::size_t r) {
    return fn(west_easting + (static_cast<double>(c) + 0.5) * cell_m,
              north_northing - (static_cast<double>(r) + 0.5) * cell_m);
  });
}

std::shared_ptr<const ElevationGrid> constant_grid(GridKind kind, double value, LatLon north_west, double cell_m,
                                                   std::size_t size) {
  return equatorial_grid(kind, north_west, cell_m, size, size, [value](double, double) { return value; });
}

LatLon ForestScene::at(double east_offset_m, double north_offset_m) const {
  return crs.inverse({centre_easting + east_offset_m, centre_northing + north_offset_m});
}

ForestScene make_forest_scene(std::uint32_t seed, double extent_m, double cell_m) {
  constexpr int kZone = 18;
  const Crs crs = Crs::utm(kZone, false);
  const PlanarPoint centre = crs.forward({45.30, -76.10});
  const double west = std::floor(centre.x - 0.5 * extent_m);
  const double north = std::floor(centre.y + 0.5 * extent_m);
  const auto n = static_cast<std::size_t>(extent_m / cell_m);

  auto terrain = [=](double e, double nn) {
    const double x = e - west, y = north - nn;
    return 90.0 + 12.0 * std::sin(2.0 * std::numbers::pi * x / 1700.0) * std::cos(2.0 * std::numbers::pi * y / 1300.0) +
           0.004 * x;
  };
  const auto lattice = static_cast<std::size_t>(extent_m / 120.0) + 2;
  const ValueNoise cover(seed, 120.0, lattice);
  const ValueNoise tops(seed + 1, 120.0, lattice);
  auto canopy = [=](double e, double nn) {
    const double x = e - west, y = north - nn;
    const double c = cover(x, y);
    if (c > 0.5) return 14.0 + 10.0 * tops(x, y);
    if (c > 0.4) return 2.0;  // shrubs below the detection threshold
    return 0.0;
  };

  auto dtm = utm_grid(GridKind::Terrain, kZone, west, north, cell_m, n, n, terrain);
  auto dsm = utm_grid(GridKind::Surface, kZone, west, north, cell_m, n, n,
                      [=](double e, double nn) { return terrain(e, nn) + canopy(e, nn); });
  ForestScene scene{ElevationStack(dtm, dsm), crs, west + 0.5 * extent_m, north - 0.5 * extent_m, extent_m, {}};
  scene.tx.position = scene.at(0.0, 0.0);
  scene.tx.height_m = 30.0;
  scene.tx.frequency_mhz = 2669.0;
  return scene;
}

SyntheticDrive make_drive(const ForestScene& scene, const SafeConfig& config, std::size_t cells, std::size_t per_cell,
                          double sigma_db, std::uint32_t seed, double min_range_m, double max_range_m) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> shadow(0.0, sigma_db);
  SyntheticDrive drive;
  std::set<std::string> used;
  while (drive.cell_noise_db.size() < cells) {
    const double range = min_range_m + (max_range_m - min_range_m) * unit(rng);
    const double az = 2.0 * std::numbers::pi * unit(rng);
    const LatLon anchor = scene.at(range * std::sin(az), range * std::cos(az));
    const std::string hash = geohash8(anchor.lat, anchor.lon);
    if (!used.insert(hash).second) continue;
    const GeohashCell cell = geohash_decode(hash);
    const double noise = shadow(rng);
    drive.cell_noise_db.push_back(noise);
    for (std::size_t k = 0; k < per_cell; ++k) {
      MeasurementRecord r;
      r.lat = cell.lat_min + (0.1 + 0.8 * unit(rng)) * (cell.lat_max - cell.lat_min);
      r.lon = cell.lon_min + (0.1 + 0.8 * unit(rng)) * (cell.lon_max - cell.lon_min);
      r.frequency_mhz = scene.tx.frequency_mhz;
      r.tx_id = "synthetic-tx";
      r.tx_eirp_dbm = 60.0;
      r.noise_floor_dbm = -120.0;
      r.rx_height_m = 2.5;
      LinkParams link{r.frequency_mhz, scene.tx.height_m, r.rx_height_m, scene.tx.position, {r.lat, r.lon},
                      scene.tx.polarization};
      r.pl_measured_db = predict(scene.stack, link, config).pl_safe_db + noise;
      drive.records.push_back(r);
    }
  }
  return drive;
}

}  // namespace safe::synth
