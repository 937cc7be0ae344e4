#define BOOST_ALLOW_DEPRECATED_HEADERS
#include "safe/crs.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/srs/projection.hpp>

#include <cmath>
#include <string>

#include "safe/error.hpp"

namespace safe {

namespace bg = boost::geometry;

namespace detail {

class Projector {
 public:
  explicit Projector(const std::string& proj4) : proj_(bg::srs::proj4(proj4)) {}

  PlanarPoint forward(LatLon p) const {
    Geo in(p.lon, p.lat);
    Xy out;
    proj_.forward(in, out);
    return {bg::get<0>(out), bg::get<1>(out)};
  }

  LatLon inverse(PlanarPoint p) const {
    Xy in(p.x, p.y);
    Geo out;
    proj_.inverse(in, out);
    return {bg::get<1>(out), bg::get<0>(out)};
  }

 private:
  using Geo = bg::model::point<double, 2, bg::cs::geographic<bg::degree>>;
  using Xy = bg::model::point<double, 2, bg::cs::cartesian>;
  bg::srs::projection<> proj_;
};

}  // namespace detail

namespace {

// UTM zones for the NAD83(CSRS) projected family used by Canadian elevation
// products.
int csrs_utm_zone(int epsg) {
  switch (epsg) {
    case 3154: return 7;
    case 3155: return 8;
    case 3156: return 9;
    case 3157: return 10;
    case 2955: return 11;
    case 2956: return 12;
    case 2957: return 13;
    case 3158: return 14;
    case 3159: return 15;
    case 3160: return 16;
    case 2958: return 17;
    case 2959: return 18;
    case 2960: return 19;
    case 2961: return 20;
    case 2962: return 21;
    case 3761: return 22;
    default: return 0;
  }
}

constexpr double kMaxZoneOffsetDeg = 20.0;

}  // namespace

Crs Crs::geographic(int epsg) {
  Crs c;
  c.kind_ = Kind::Geographic;
  c.epsg_ = epsg;
  return c;
}

Crs Crs::utm(int zone, bool south, int epsg) {
  if (zone < 1 || zone > 60) fail(Errc::MalformedRaster, "UTM zone out of range");
  Crs c;
  c.kind_ = Kind::Utm;
  c.zone_ = zone;
  c.south_ = south;
  c.epsg_ = epsg != 0 ? epsg : (south ? 32700 : 32600) + zone;
  std::string p4 = "+proj=utm +zone=" + std::to_string(zone) + (south ? " +south" : "") +
                   " +ellps=WGS84 +units=m +no_defs";
  c.projector_ = std::make_shared<const detail::Projector>(p4);
  return c;
}

Crs Crs::from_epsg(int epsg) {
  if (epsg == 4326 || epsg == 4269 || epsg == 4617) return geographic(epsg);
  if (epsg >= 32601 && epsg <= 32660) return utm(epsg - 32600, false, epsg);
  if (epsg >= 32701 && epsg <= 32760) return utm(epsg - 32700, true, epsg);
  if (epsg >= 26901 && epsg <= 26923) return utm(epsg - 26900, false, epsg);
  if (int zone = csrs_utm_zone(epsg); zone != 0) return utm(zone, false, epsg);
  fail(Errc::MalformedRaster, "unsupported coordinate system EPSG:" + std::to_string(epsg));
}

std::string Crs::id() const { return "EPSG:" + std::to_string(epsg_); }

PlanarPoint Crs::forward(LatLon p) const {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || std::abs(p.lat) > 90.0) {
    fail(Errc::TransformFailure, "invalid geographic coordinate");
  }
  if (kind_ == Kind::Geographic) return {p.lon, p.lat};
  const double central = -183.0 + 6.0 * zone_;
  double dlon = std::remainder(p.lon - central, 360.0);
  if (std::abs(dlon) > kMaxZoneOffsetDeg || std::abs(p.lat) > 84.5) {
    fail(Errc::TransformFailure, "coordinate not representable in " + id());
  }
  PlanarPoint out;
  try {
    out = projector_->forward(p);
  } catch (const std::exception& e) {
    fail(Errc::TransformFailure, e.what());
  }
  if (!std::isfinite(out.x) || !std::isfinite(out.y)) {
    fail(Errc::TransformFailure, "projection produced a non-finite coordinate");
  }
  return out;
}

LatLon Crs::inverse(PlanarPoint p) const {
  if (kind_ == Kind::Geographic) return {p.y, p.x};
  LatLon out;
  try {
    out = projector_->inverse(p);
  } catch (const std::exception& e) {
    fail(Errc::TransformFailure, e.what());
  }
  if (!std::isfinite(out.lat) || !std::isfinite(out.lon)) {
    fail(Errc::TransformFailure, "inverse projection produced a non-finite coordinate");
  }
  return out;
}

}  // namespace safe
