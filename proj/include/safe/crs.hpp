#pragma once

#include <memory>
#include <string>

#include "safe/geodesy.hpp"

namespace safe {

struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
};

namespace detail {
class Projector;
}

// Coordinate reference systems accepted for elevation rasters: geographic
// lat/lon (WGS84, NAD83 and NAD83(CSRS) treated as coincident) and projected
// UTM. For geographic systems x is longitude and y latitude, in degrees.
class Crs {
 public:
  enum class Kind { Geographic, Utm };

  static Crs geographic(int epsg = 4326);
  static Crs utm(int zone, bool south, int epsg = 0);
  // Throws MalformedRaster for EPSG codes outside the supported families.
  static Crs from_epsg(int epsg);

  Kind kind() const noexcept { return kind_; }
  int zone() const noexcept { return zone_; }
  bool south() const noexcept { return south_; }
  int epsg() const noexcept { return epsg_; }
  std::string id() const;

  PlanarPoint forward(LatLon p) const;  // throws TransformFailure
  LatLon inverse(PlanarPoint p) const;  // throws TransformFailure

 private:
  Crs() = default;

  Kind kind_ = Kind::Geographic;
  int zone_ = 0;
  bool south_ = false;
  int epsg_ = 4326;
  std::shared_ptr<const detail::Projector> projector_;
};

}  // namespace safe
