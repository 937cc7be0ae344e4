#pragma once

#include <string>
#include <string_view>

namespace safe {

struct GeohashCell {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  bool contains(double lat, double lon) const noexcept {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
  }
};

inline constexpr std::size_t kValidationGeohashPrecision = 8;

// Standard base-32 geohash. CoordinateOutOfRange outside [-90, 90] x [-180, 180],
// InvalidParameter for precision outside [1, 12].
std::string geohash_encode(double lat, double lon, std::size_t precision);
std::string geohash8(double lat, double lon);

// ParseError for an empty hash or a character outside the alphabet.
GeohashCell geohash_decode(std::string_view hash);

}  // namespace safe
