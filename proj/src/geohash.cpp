#include "safe/geohash.hpp"

#include <cmath>

#include "safe/error.hpp"

namespace safe {

namespace {

constexpr std::string_view kAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";

}  // namespace

std::string geohash_encode(double lat, double lon, std::size_t precision) {
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
    fail(Errc::CoordinateOutOfRange, "coordinate outside [-90, 90] x [-180, 180]");
  }
  if (precision < 1 || precision > 12) fail(Errc::InvalidParameter, "geohash precision must be in [1, 12]");
  double lat_lo = -90.0, lat_hi = 90.0, lon_lo = -180.0, lon_hi = 180.0;
  std::string out;
  out.reserve(precision);
  bool even = true;  // bits alternate, longitude first
  int bit = 0;
  int index = 0;
  while (out.size() < precision) {
    double& lo = even ? lon_lo : lat_lo;
    double& hi = even ? lon_hi : lat_hi;
    const double v = even ? lon : lat;
    const double mid = 0.5 * (lo + hi);
    index <<= 1;
    if (v >= mid) {
      index |= 1;
      lo = mid;
    } else {
      hi = mid;
    }
    even = !even;
    if (++bit == 5) {
      out.push_back(kAlphabet[static_cast<std::size_t>(index)]);
      bit = 0;
      index = 0;
    }
  }
  return out;
}

std::string geohash8(double lat, double lon) { return geohash_encode(lat, lon, kValidationGeohashPrecision); }

GeohashCell geohash_decode(std::string_view hash) {
  if (hash.empty()) fail(Errc::ParseError, "empty geohash");
  GeohashCell c{-90.0, 90.0, -180.0, 180.0};
  bool even = true;
  for (char ch : hash) {
    const auto idx = kAlphabet.find(ch);
    if (idx == std::string_view::npos) fail(Errc::ParseError, std::string("invalid geohash character '") + ch + "'");
    for (int b = 4; b >= 0; --b) {
      const bool set = (idx >> b) & 1U;
      double& lo = even ? c.lon_min : c.lat_min;
      double& hi = even ? c.lon_max : c.lat_max;
      const double mid = 0.5 * (lo + hi);
      (set ? lo : hi) = mid;
      even = !even;
    }
  }
  return c;
}

}  // namespace safe
