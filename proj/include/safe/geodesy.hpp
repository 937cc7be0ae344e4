#pragma once

#include <cstddef>
#include <vector>

namespace safe {

struct LatLon {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

/// WGS84 ellipsoid geodesic between two points, parameterised by arc length.
class GeodesicLine {
 public:
  GeodesicLine(LatLon from, LatLon to);

  double length_m() const noexcept { return length_m_; }
  double azimuth_deg() const noexcept { return azimuth_deg_; }
  LatLon from() const noexcept { return from_; }
  LatLon to() const noexcept { return to_; }

  /// Point at arc length `s_m` from the start. `s_m == length_m()` returns
  /// the exact end point.
  LatLon position(double s_m) const;

 private:
  LatLon from_;
  LatLon to_;
  double length_m_ = 0.0;
  double azimuth_deg_ = 0.0;
};

double geodesic_distance_m(LatLon a, LatLon b);

// n points from tx to rx inclusive, equally spaced in arc length.
// Throws DegenerateLink when tx and rx coincide within 1e-9 degrees.
std::vector<LatLon> geodesic_points(LatLon tx, LatLon rx, std::size_t n);

/// Point reached from `from` after `distance_m` along `azimuth_deg` (direct
/// geodesic problem), without snapping to any target.
LatLon geodesic_direct(LatLon from, double azimuth_deg, double distance_m);

}  // namespace safe
