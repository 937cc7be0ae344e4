#include <functional>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "safe/error.hpp"
#include "safe/geodesy.hpp"

using namespace safe;

namespace {
// WGS84 semi-major axis; the equator is a geodesic of length 2*pi*a.
constexpr double kA = 6378137.0;
}  // namespace

TEST_CASE("distance along the equator equals the arc of the semi-major axis") {
  for (double dlon : {0.001, 0.1, 1.0, 10.0}) {
    const double expected = kA * dlon * std::numbers::pi / 180.0;
    CHECK(geodesic_distance_m({0.0, 0.0}, {0.0, dlon}) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("meridian distance over one degree at 45N") {
  // Meridian arc between 44.5 and 45.5 degrees on WGS84 from the series
  // expansion of the meridian length.
  const double e2 = 0.00669437999014;
  auto meridian = [&](double phi) {
    const double e4 = e2 * e2, e6 = e4 * e2;
    return kA * ((1 - e2 / 4 - 3 * e4 / 64 - 5 * e6 / 256) * phi - (3 * e2 / 8 + 3 * e4 / 32 + 45 * e6 / 1024) * std::sin(2 * phi) +
                 (15 * e4 / 256 + 45 * e6 / 1024) * std::sin(4 * phi) - (35 * e6 / 3072) * std::sin(6 * phi));
  };
  const double d2r = std::numbers::pi / 180.0;
  const double expected = meridian(45.5 * d2r) - meridian(44.5 * d2r);
  CHECK(geodesic_distance_m({44.5, -75.0}, {45.5, -75.0}) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("geodesic line end points are exact") {
  const LatLon a{45.30, -76.10}, b{45.31, -76.05};
  const GeodesicLine line(a, b);
  CHECK(line.position(0.0) == a);
  CHECK(line.position(line.length_m()) == b);
  const LatLon mid = line.position(0.5 * line.length_m());
  CHECK(geodesic_distance_m(a, mid) == doctest::Approx(0.5 * line.length_m()).epsilon(1e-9));
  CHECK(geodesic_distance_m(mid, b) == doctest::Approx(0.5 * line.length_m()).epsilon(1e-9));
}

TEST_CASE("geodesic_points spacing and end points") {
  const LatLon a{45.30, -76.10}, b{45.33, -76.02};
  const auto pts = geodesic_points(a, b, 11);
  REQUIRE(pts.size() == 11);
  CHECK(pts.front() == a);
  CHECK(pts.back() == b);
  const double step = geodesic_distance_m(a, b) / 10.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(geodesic_distance_m(pts[i - 1], pts[i]) == doctest::Approx(step).epsilon(1e-8));
  }
}

TEST_CASE("direct problem inverts the inverse problem") {
  const LatLon a{45.0, -75.0};
  const LatLon b = geodesic_direct(a, 37.0, 12345.0);
  const GeodesicLine line(a, b);
  CHECK(line.length_m() == doctest::Approx(12345.0).epsilon(1e-10));
  CHECK(line.azimuth_deg() == doctest::Approx(37.0).epsilon(1e-9));
}

TEST_CASE("geodesy errors") {
  CHECK_THROWS_AS(GeodesicLine({1.0, 1.0}, {1.0, 1.0}), Error);
  try {
    geodesic_points({1.0, 1.0}, {1.0, 1.0}, 5);
    FAIL("expected DegenerateLink");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateLink);
  }
  try {
    geodesic_distance_m({91.0, 0.0}, {0.0, 0.0});
    FAIL("expected CoordinateOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CoordinateOutOfRange);
  }
  try {
    geodesic_points({0.0, 0.0}, {0.0, 1.0}, 1);
    FAIL("expected InvalidParameter");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidParameter);
  }
}
