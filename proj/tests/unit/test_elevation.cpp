#include <functional>
#include <cmath>
#include <random>

#include "doctest.h"
#include "safe/elevation.hpp"
#include "safe/error.hpp"
#include "synthetic.hpp"

using namespace safe;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

ElevationGrid small_utm(std::vector<double> v, std::size_t w, std::size_t h, std::optional<double> nodata = {}) {
  return ElevationGrid(GridKind::Terrain, Crs::utm(18, false), GeoTransform{445000.0, 10.0, 0.0, 5017000.0, 0.0, -10.0},
                       w, h, std::move(v), nodata);
}

}  // namespace

TEST_CASE("constant field samples exactly") {
  const auto g = synth::constant_grid(GridKind::Terrain, 100.0, {0.001, 0.0}, 10.0, 10);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const LatLon p = synth::equatorial_offset({0.001, 0.0}, 100.0 * u(rng), -100.0 * u(rng));
    const auto v = g->sample(p);
    REQUIRE(v);
    CHECK(*v == 100.0);
  }
}

TEST_CASE("bilinear interpolation matches a hand computation") {
  // 3x2 grid; cell centres at easting 445005, 445015, 445025 and northing
  // 5016995, 5016985.
  const ElevationGrid g = small_utm({10, 20, 30, 40, 50, 60}, 3, 2);
  const Crs& crs = g.crs();
  const auto at = [&](double e, double n) { return *g.sample_planar({e, n}); };
  CHECK(at(445005.0, 5016995.0) == doctest::Approx(10.0));
  CHECK(at(445025.0, 5016985.0) == doctest::Approx(60.0));
  // Quarter of the way east between the first two centres, 30 % south.
  const double fx = 0.25, fy = 0.3;
  const double expected = (1 - fy) * ((1 - fx) * 10 + fx * 20) + fy * ((1 - fx) * 40 + fx * 50);
  CHECK(at(445005.0 + 10.0 * fx, 5016995.0 - 10.0 * fy) == doctest::Approx(expected).epsilon(1e-12));
  // Same point through the geographic entry point.
  const LatLon ll = crs.inverse({445005.0 + 10.0 * fx, 5016995.0 - 10.0 * fy});
  CHECK(*g.sample(ll) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("edge half pixels clamp and outside is empty") {
  const ElevationGrid g = small_utm({10, 20, 30, 40, 50, 60}, 3, 2);
  CHECK(*g.sample_planar({445001.0, 5016999.0}) == doctest::Approx(10.0));
  CHECK_FALSE(g.sample_planar({444999.0, 5016995.0}));
  CHECK_FALSE(g.sample_planar({445005.0, 5017001.0}));
  CHECK_FALSE(g.sample_planar({445031.0, 5016995.0}));
}

TEST_CASE("nodata neighbours yield no sample") {
  const ElevationGrid g = small_utm({10, -9999, 30, 40, 50, 60}, 3, 2, -9999.0);
  CHECK_FALSE(g.sample_planar({445010.0, 5016990.0}));
  // Exactly on a valid cell centre the nodata neighbour has zero weight.
  CHECK(*g.sample_planar({445005.0, 5016985.0}) == doctest::Approx(40.0));
}

TEST_CASE("grid invariants") {
  CHECK(code_of([] { small_utm({10, 20, 30, 40, 50, 1e5}, 3, 2); }) == Errc::MalformedRaster);
  // NaN always counts as nodata, declared or not.
  CHECK_FALSE(small_utm({10, 20, 30, 40, 50, NAN}, 3, 2).sample_planar({445025.0, 5016985.0}));
  CHECK(code_of([] { small_utm({10, 20, 30}, 3, 2); }) == Errc::MalformedRaster);
  CHECK(code_of([] {
          ElevationGrid(GridKind::Terrain, Crs::utm(18, false), GeoTransform{0, 0.0, 0, 0, 0, -1}, 1, 1, {1.0});
        }) == Errc::MalformedRaster);
  const ElevationGrid g = small_utm({10, 20, 30, 40, 50, 60}, 3, 2);
  CHECK(g.resolution().first == 10.0);
  CHECK(g.resolution().second == 10.0);
  const PlanarPoint px = g.world_to_pixel(g.pixel_to_world({1.25, 0.75}));
  CHECK(px.x == doctest::Approx(1.25));
  CHECK(px.y == doctest::Approx(0.75));
}

TEST_CASE("from_raster requires georeferencing and metres") {
  RasterData r;
  r.width = 1;
  r.height = 1;
  r.values = {5.0};
  CHECK(code_of([&] { ElevationGrid::from_raster(r, GridKind::Terrain); }) == Errc::MalformedRaster);
  r.transform = GeoTransform{};
  CHECK(code_of([&] { ElevationGrid::from_raster(r, GridKind::Terrain); }) == Errc::MalformedRaster);
  r.epsg = 4326;
  r.vertical_units = 9002;
  CHECK(code_of([&] { ElevationGrid::from_raster(r, GridKind::Terrain); }) == Errc::UnitError);
  r.vertical_units = 9001;
  CHECK(ElevationGrid::from_raster(r, GridKind::Terrain).at(0, 0) == 5.0);
}

TEST_CASE("clutter height is DSM minus DTM, floored at zero") {
  const LatLon nw{0.001, 0.0};
  auto dtm = synth::equatorial_grid(GridKind::Terrain, nw, 10.0, 20, 20, [](double e, double) { return 50.0 + 0.1 * e; });
  auto dsm = synth::equatorial_grid(GridKind::Surface, nw, 10.0, 20, 20, [](double e, double n) {
    const double ground = 50.0 + 0.1 * e;
    return e < 100.0 ? ground + 18.0 : (n > -100.0 ? ground - 3.0 : ground + 2.0);
  });
  const ElevationStack stack(dtm, dsm);
  CHECK(stack.clutter_height_at(synth::equatorial_offset(nw, 45.0, -45.0)) == doctest::Approx(18.0));
  CHECK(stack.clutter_height_at(synth::equatorial_offset(nw, 145.0, -45.0)) == 0.0);
  CHECK(stack.clutter_height_at(synth::equatorial_offset(nw, 145.0, -145.0)) == doctest::Approx(2.0));
  CHECK(stack.terrain_height_at(synth::equatorial_offset(nw, 45.0, -45.0)) == doctest::Approx(54.5));
  CHECK(code_of([&] { stack.terrain_height_at({0.5, 0.5}); }) == Errc::NoCoverage);
  CHECK(code_of([&] { stack.clutter_height_at({0.5, 0.5}); }) == Errc::NoCoverage);
}

TEST_CASE("tree growth subtracts exactly rate times years") {
  const LatLon nw{0.001, 0.0};
  auto dtm = synth::constant_grid(GridKind::Terrain, 80.0, nw, 10.0, 20);
  auto dsm = synth::equatorial_grid(GridKind::Surface, nw, 10.0, 20, 20,
                                    [](double e, double n) { return 80.0 + std::fmod(0.37 * e - 0.11 * n, 25.0); });
  const ElevationStack base(dtm, dsm);
  const ElevationStack grown = base.apply_tree_growth(0.5, 7.0);
  CHECK(grown.tree_growth_offset() == 3.5);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(5.0, 195.0);
  for (int i = 0; i < 500; ++i) {
    const LatLon p = synth::equatorial_offset(nw, u(rng), -u(rng));
    const double before = base.clutter_height_at(p);
    const double after = grown.clutter_height_at(p);
    CHECK(after >= 0.0);
    CHECK(after == std::max(before - 3.5, 0.0));
  }
  CHECK(code_of([&] { base.apply_tree_growth(-0.5, 7.0); }) == Errc::NegativeInput);
  CHECK(code_of([&] { base.apply_tree_growth(0.5, -1.0); }) == Errc::NegativeInput);
}

TEST_CASE("fallback terrain covers gaps without clutter") {
  const LatLon nw{0.001, 0.0};
  auto dtm = synth::constant_grid(GridKind::Terrain, 80.0, nw, 10.0, 10);
  auto dsm = synth::constant_grid(GridKind::Surface, 100.0, nw, 10.0, 10);
  auto coarse = synth::constant_grid(GridKind::Terrain, 75.0, {0.01, -0.01}, 100.0, 40);
  const ElevationStack stack(dtm, dsm, coarse);
  const LatLon inside = synth::equatorial_offset(nw, 50.0, -50.0);
  const LatLon outside = synth::equatorial_offset(nw, 500.0, -50.0);
  CHECK(stack.has_high_resolution(inside));
  CHECK_FALSE(stack.has_high_resolution(outside));
  CHECK(stack.terrain_height_at(inside) == 80.0);
  CHECK(stack.clutter_height_at(inside) == 20.0);
  CHECK(stack.terrain_height_at(outside) == 75.0);
  CHECK(stack.clutter_height_at(outside) == 0.0);
}

TEST_CASE("stack kind checks") {
  auto t = synth::constant_grid(GridKind::Terrain, 1.0);
  auto s = synth::constant_grid(GridKind::Surface, 1.0);
  CHECK(code_of([&] { ElevationStack(s, s); }) == Errc::InvalidParameter);
  CHECK(code_of([&] { ElevationStack(t, t); }) == Errc::InvalidParameter);
  CHECK(code_of([&] { ElevationStack(t, s, nullptr, -1.0); }) == Errc::NegativeInput);
}
