#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "safe/elevation.hpp"
#include "safe/geodesy.hpp"

namespace safe {

enum class LeafState { InLeaf, OutOfLeaf };

std::string_view to_string(LeafState s);
LeafState parse_leaf_state(std::string_view s);

enum class RetModelKind {
  // Radiative-energy-transfer solution: coherent component, multiply
  // forward-scattered lobe orders filtered by the receiver beam, and an
  // isotropic diffuse field that decays with depth below the canopy top.
  Transport,
  // Non-normative dual-slope line, for tests and missing coefficient sets.
  DualSlope,
};

std::string_view to_string(RetModelKind k);
RetModelKind parse_ret_model(std::string_view s);  // "transport", "dual-slope"

struct TransportCoefficients {
  double albedo = 0.8;             // alpha: scattered / extinguished power
  double phase_beamwidth_deg = 50; // beta: width of the forward scatter lobe
  double extinction_per_m = 0.55;  // sigma_tau
  double forward_ratio = 0.8;      // W: forward-scattered / total scattered
  double rx_beamwidth_deg = 30;    // gamma_R
  double lateral_escape = 0.05;    // diffuse decay per unit optical depth at grazing incidence
};

struct DualSlopeCoefficients {
  double initial_db_per_m = 2.0;
  double final_db_per_m = 0.5;
  double knee_depth_m = 10.0;
};

struct RetParameters {
  std::string species_label = "american-plane";
  LeafState leaf_state = LeafState::InLeaf;
  double frequency_ghz = 3.5;
  RetModelKind model = RetModelKind::Transport;
  TransportCoefficients transport;
  DualSlopeCoefficients dual_slope;

  // Default set: American plane, in leaf, 3.5 GHz.
  static RetParameters american_plane_in_leaf();

  // Throws InvalidParameter when a coefficient is out of its physical range
  // or the resulting loss curve is not zero at the canopy edge and
  // nondecreasing with depth.
  void validate() const;
};

// Coefficient sets keyed by (species, leaf state, frequency band), loaded from
// a flat key-value file:
//
//   [american-plane in-leaf 3.5]
//   model = transport
//   albedo = 0.8
//   ...
class RetCoefficientTable {
 public:
  static RetCoefficientTable builtin();
  static RetCoefficientTable load(const std::filesystem::path& path);
  static RetCoefficientTable parse(std::string_view text);

  // UncalibratedParameters when no entry matches; bands match within 1 %.
  RetParameters lookup(std::string_view species, LeafState state, double frequency_ghz) const;
  const std::vector<RetParameters>& entries() const noexcept { return entries_; }

 private:
  std::vector<RetParameters> entries_;
};

std::string_view builtin_ret_table_text();

// Foliage loss (dB) along `depth_m` of canopy entered at `theta_deg` above
// the local horizontal. NegativeDepth, ThetaOutOfRange.
double ret_loss(const RetParameters& params, double depth_m, double theta_deg);

std::vector<std::pair<double, double>> ret_curve(const RetParameters& params, double theta_deg, double max_depth_m,
                                                 double step_m);

struct RetLimit {
  double limit_db = 20.0;

  static constexpr double kSemiRuralDb = 20.0;
  static constexpr double kHeavilyForestedDb = 30.0;
  static RetLimit semi_rural() { return {kSemiRuralDb}; }
  static RetLimit heavily_forested() { return {kHeavilyForestedDb}; }
};

double clamp_ret(double raw_loss_db, RetLimit limit);

struct Terminal {
  LatLon position;
  double height_agl_m = 0.0;
};

struct FoliageIntersection {
  double total_depth_m = 0.0;
  std::optional<double> theta_deg;  // elevation angle at first canopy entry
  std::vector<std::pair<double, double>> segments;  // along-path [start, end) metres
  bool fallback_used = false;  // some samples only had coarse terrain (no foliage counted)
  double path_length_m = 0.0;
};

inline constexpr double kDefaultIntersectionStepM = 1.0;
inline constexpr double kEffectiveEarthFactor = 4.0 / 3.0;

// Walks the direct ray between the antennas in `step_m` increments. A sample
// is inside the canopy when terrain < ray < terrain + clutter height.
// NonpositiveStep, NoCoverage.
FoliageIntersection intersect_ray_with_clutter(const ElevationStack& stack, const Terminal& tx, const Terminal& rx,
                                               double step_m = kDefaultIntersectionStepM);

}  // namespace safe
