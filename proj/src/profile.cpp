#include "safe/profile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "safe/error.hpp"

namespace safe {

ClutterClass ClutterClass::standard(ClutterCategory category) {
  switch (category) {
    case ClutterCategory::WaterOpenRural: return {category, 0.0};
    case ClutterCategory::Suburban: return {category, 10.0};
    case ClutterCategory::UrbanTreesForest: return {category, 15.0};
    case ClutterCategory::DenseUrban: return {category, 20.0};
  }
  return {category, 0.0};
}

std::string_view to_string(ClutterCategory c) {
  switch (c) {
    case ClutterCategory::WaterOpenRural: return "water-open-rural";
    case ClutterCategory::Suburban: return "suburban";
    case ClutterCategory::UrbanTreesForest: return "urban-trees-forest";
    case ClutterCategory::DenseUrban: return "dense-urban";
  }
  return "unknown";
}

ClutterCategory parse_clutter_category(std::string_view name) {
  for (auto c : {ClutterCategory::WaterOpenRural, ClutterCategory::Suburban, ClutterCategory::UrbanTreesForest,
                 ClutterCategory::DenseUrban}) {
    if (to_string(c) == name) return c;
  }
  fail(Errc::InvalidParameter, "unknown clutter class '" + std::string(name) + "'");
}

std::size_t profile_point_count(double length_m, double max_spacing_m) {
  if (!(max_spacing_m > 0.0)) fail(Errc::InvalidParameter, "profile spacing must be > 0");
  // The small slack keeps exact multiples (3000 m / 30 m) from gaining a
  // point through rounding noise in the geodesic length.
  const double intervals = std::ceil(length_m / max_spacing_m - 1e-9);
  return static_cast<std::size_t>(std::max(intervals, 1.0)) + 1;
}

RawProfile extract_profile(const ElevationStack& stack, LatLon tx, LatLon rx, double max_spacing_m) {
  const GeodesicLine line(tx, rx);
  const double length_m = line.length_m();
  if (length_m < kMinPathLengthKm * 1000.0) {
    fail(Errc::PathTooShort, "path length " + std::to_string(length_m) + " m is below 250 m");
  }
  const std::size_t n = profile_point_count(length_m, max_spacing_m);
  RawProfile raw;
  raw.spacing_m = length_m / static_cast<double>(n - 1);
  raw.points = geodesic_points(tx, rx, n);
  raw.distances_km.resize(n);
  raw.terrain_m.resize(n);
  raw.clutter_m.resize(n);
  raw.high_resolution.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw.distances_km[i] = i + 1 == n ? length_m / 1000.0 : raw.spacing_m * static_cast<double>(i) / 1000.0;
    const ColumnSample c = stack.column_at(raw.points[i]);
    raw.terrain_m[i] = c.terrain_m;
    raw.clutter_m[i] = c.clutter_m;
    raw.high_resolution[i] = c.high_resolution;
  }
  return raw;
}

PathProfile classify_clutter(const RawProfile& raw, const ClutterClass& cls, double detection_threshold_m) {
  if (!(detection_threshold_m > 0.0)) fail(Errc::InvalidParameter, "detection threshold must be > 0");
  PathProfile out;
  out.distances_km = raw.distances_km;
  out.terrain_m = raw.terrain_m;
  out.spacing_m = raw.spacing_m;
  out.clutter_m.resize(raw.clutter_m.size());
  std::transform(raw.clutter_m.begin(), raw.clutter_m.end(), out.clutter_m.begin(), [&](double h) {
    return h >= detection_threshold_m ? cls.representative_height_m : 0.0;
  });
  if (!out.clutter_m.empty()) {
    out.clutter_m.front() = 0.0;
    out.clutter_m.back() = 0.0;
  }
  return out;
}

PathProfile strip_clutter(const PathProfile& profile) {
  PathProfile out = profile;
  std::fill(out.clutter_m.begin(), out.clutter_m.end(), 0.0);
  return out;
}

void PathProfile::validate() const {
  const std::size_t n = distances_km.size();
  if (n < 2 || terrain_m.size() != n || clutter_m.size() != n) {
    fail(Errc::InvalidProfile, "profile vectors must share one length >= 2");
  }
  if (distances_km.front() != 0.0) fail(Errc::InvalidProfile, "profile must start at distance 0");
  const double step = distances_km.back() / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(distances_km[i]) || !std::isfinite(terrain_m[i]) || !std::isfinite(clutter_m[i]) ||
        clutter_m[i] < 0.0) {
      fail(Errc::InvalidProfile, "profile contains a non-finite or negative value");
    }
    if (i > 0 && !(distances_km[i] > distances_km[i - 1])) {
      fail(Errc::InvalidProfile, "profile distances must be strictly ascending");
    }
    if (std::abs(distances_km[i] - step * static_cast<double>(i)) > 1e-6) {
      fail(Errc::InvalidProfile, "profile points are not equally spaced");
    }
  }
  if (clutter_m.front() != 0.0 || clutter_m.back() != 0.0) {
    fail(Errc::InvalidProfile, "clutter height at both profile ends must be 0");
  }
}

}  // namespace safe
