#pragma once

#include <string_view>
#include <vector>

#include "safe/elevation.hpp"
#include "safe/geodesy.hpp"

namespace safe {

enum class ClutterCategory { WaterOpenRural, Suburban, UrbanTreesForest, DenseUrban };

struct ClutterClass {
  ClutterCategory category = ClutterCategory::UrbanTreesForest;
  double representative_height_m = 15.0;

  // Default representative heights: 0 / 10 / 15 / 20 m.
  static ClutterClass standard(ClutterCategory category);
};

std::string_view to_string(ClutterCategory c);
ClutterCategory parse_clutter_category(std::string_view name);

inline constexpr double kDefaultProfileSpacingM = 30.0;
inline constexpr double kDefaultDetectionThresholdM = 4.0;
inline constexpr double kMinPathLengthKm = 0.25;

// Equally spaced path samples from the transmitter. `clutter_m` holds raw
// DSM-DTM heights in a RawProfile and representative heights in a
// PathProfile.
struct ProfileSamples {
  std::vector<double> distances_km;
  std::vector<double> terrain_m;
  std::vector<double> clutter_m;
  double spacing_m = 0.0;

  std::size_t size() const noexcept { return distances_km.size(); }
  double length_km() const noexcept { return distances_km.empty() ? 0.0 : distances_km.back(); }
};

struct RawProfile : ProfileSamples {
  std::vector<LatLon> points;
  // Per point: true when the high-resolution DTM was available.
  std::vector<bool> high_resolution;
};

struct PathProfile : ProfileSamples {
  // Throws InvalidProfile if any invariant of the equally spaced profile is
  // broken (sizes, ordering, spacing, zero clutter at both ends).
  void validate() const;
};

std::size_t profile_point_count(double length_m, double max_spacing_m);

// Samples terrain and raw clutter at n = ceil(d / max_spacing) + 1 geodesic
// points. PathTooShort below 0.25 km; NoCoverage propagated from the stack.
RawProfile extract_profile(const ElevationStack& stack, LatLon tx, LatLon rx,
                           double max_spacing_m = kDefaultProfileSpacingM);

// Raw clutter at or above the threshold becomes the class's representative
// height, anything lower becomes 0; both end points are forced to 0.
PathProfile classify_clutter(const RawProfile& raw, const ClutterClass& cls,
                             double detection_threshold_m = kDefaultDetectionThresholdM);

PathProfile strip_clutter(const PathProfile& profile);

}  // namespace safe
