#pragma once

#include "safe/geodesy.hpp"
#include "safe/profile.hpp"

namespace safe {

enum class Polarization { Horizontal, Vertical };

struct LinkParams {
  double frequency_mhz = 0.0;
  double tx_height_m = 0.0;  // above ground
  double rx_height_m = 0.0;  // above ground
  LatLon tx;
  LatLon rx;
  Polarization polarization = Polarization::Vertical;

  // FrequencyOutOfRange outside [30, 6000] MHz, HeightOutOfRange outside (0, 3000] m.
  void validate() const;
};

struct ModelEnvironment {
  double time_percent = 50.0;      // p
  double location_percent = 50.0;  // pL
  double delta_n = 40.0;           // N-units/km
  double n0 = 325.0;               // N-units
  double omega = 0.0;              // fraction of the path over water

  void validate() const;  // InvalidParameter
};

// Intermediate quantities of one evaluation, useful for diagnostics and tests.
struct P1812Breakdown {
  double basic_loss_db = 0.0;      // Lb
  double free_space_db = 0.0;      // Lbfs
  double los_loss_db = 0.0;        // Lb0p
  double diffraction_db = 0.0;     // Ldp
  double troposcatter_db = 0.0;    // Lbs
  double ducting_db = 0.0;         // Lba
  double combined_db = 0.0;        // Lbc
  double angular_distance_mrad = 0.0;
  double beta0_percent = 0.0;
  double effective_radius_km = 0.0;
  bool trans_horizon = false;
};

// Basic transmission loss (dB) for an equally spaced profile whose clutter
// vector holds representative clutter heights (all zeros = no clutter).
// Errors: FrequencyOutOfRange, DistanceOutOfRange, HeightOutOfRange,
// InvalidProfile, InvalidParameter (environment).
double path_loss_p1812(const PathProfile& profile, const LinkParams& link, const ModelEnvironment& env = {});
P1812Breakdown p1812_breakdown(const PathProfile& profile, const LinkParams& link, const ModelEnvironment& env = {});

struct ModeLosses {
  double with_clutter_db = 0.0;
  double no_clutter_db = 0.0;
};

ModeLosses path_loss_modes(const PathProfile& profile, const LinkParams& link, const ModelEnvironment& env = {});

namespace p1812 {

// Inverse complementary cumulative normal approximation used by the
// Recommendation; exactly 0 at x = 0.5.
double inv_cum_norm(double x);

// Knife-edge loss J(nu).
double knife_edge_loss(double nu);

}  // namespace p1812

}  // namespace safe
