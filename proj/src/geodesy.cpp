#define BOOST_ALLOW_DEPRECATED_HEADERS
#include "safe/geodesy.hpp"

#include <boost/geometry/formulas/karney_direct.hpp>
#include <boost/geometry/formulas/karney_inverse.hpp>
#include <boost/geometry/srs/spheroid.hpp>

#include <cmath>
#include <string>

#include "safe/error.hpp"

namespace safe {
namespace {

namespace bg = boost::geometry;

// Boost's Karney formulas take and return degrees.
const bg::srs::spheroid<double>& wgs84() {
  static const bg::srs::spheroid<double> s(6378137.0, 6356752.314245179);
  return s;
}

using Inverse = bg::formula::karney_inverse<double, true, true, false, false>;
using Direct = bg::formula::karney_direct<double, true, false, false, false>;

void check_coordinate(LatLon p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || std::abs(p.lat) > 90.0 ||
      std::abs(p.lon) > 360.0) {
    fail(Errc::CoordinateOutOfRange,
         "coordinate out of range: " + std::to_string(p.lat) + "," + std::to_string(p.lon));
  }
}

}  // namespace

GeodesicLine::GeodesicLine(LatLon from, LatLon to) : from_(from), to_(to) {
  check_coordinate(from);
  check_coordinate(to);
  if (std::abs(from.lat - to.lat) <= 1e-9 && std::abs(from.lon - to.lon) <= 1e-9) {
    fail(Errc::DegenerateLink, "transmitter and receiver coincide");
  }
  auto r = Inverse::apply(from.lon, from.lat, to.lon, to.lat, wgs84());
  length_m_ = r.distance;
  azimuth_deg_ = r.azimuth;
}

LatLon GeodesicLine::position(double s_m) const {
  if (s_m <= 0.0) return from_;
  if (s_m >= length_m_) return to_;
  return geodesic_direct(from_, azimuth_deg_, s_m);
}

LatLon geodesic_direct(LatLon from, double azimuth_deg, double distance_m) {
  auto r = Direct::apply(from.lon, from.lat, distance_m, azimuth_deg, wgs84());
  return {r.lat2, r.lon2};
}

double geodesic_distance_m(LatLon a, LatLon b) {
  check_coordinate(a);
  check_coordinate(b);
  return Inverse::apply(a.lon, a.lat, b.lon, b.lat, wgs84()).distance;
}

std::vector<LatLon> geodesic_points(LatLon tx, LatLon rx, std::size_t n) {
  if (n < 2) fail(Errc::InvalidParameter, "geodesic_points needs n >= 2");
  GeodesicLine line(tx, rx);
  std::vector<LatLon> pts;
  pts.reserve(n);
  const double step = line.length_m() / static_cast<double>(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    pts.push_back(line.position(step * static_cast<double>(i)));
  }
  pts.push_back(rx);
  return pts;
}

}  // namespace safe
