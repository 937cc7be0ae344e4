#include "safe/p1812.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "safe/error.hpp"

// Basic transmission loss per Recommendation ITU-R P.1812-6. Distances are in
// km, heights in m and angles in mrad throughout, as in the Recommendation.

namespace safe {

void LinkParams::validate() const {
  if (!(frequency_mhz >= 30.0 && frequency_mhz <= 6000.0)) {
    fail(Errc::FrequencyOutOfRange, "frequency " + std::to_string(frequency_mhz) + " MHz outside [30, 6000]");
  }
  if (!(tx_height_m > 0.0 && tx_height_m <= 3000.0) || !(rx_height_m > 0.0 && rx_height_m <= 3000.0)) {
    fail(Errc::HeightOutOfRange, "antenna heights must lie in (0, 3000] m above ground");
  }
}

void ModelEnvironment::validate() const {
  if (!(time_percent >= 1.0 && time_percent <= 50.0)) fail(Errc::InvalidParameter, "time percentage must be in [1, 50]");
  if (!(location_percent >= 1.0 && location_percent <= 99.0)) {
    fail(Errc::InvalidParameter, "location percentage must be in [1, 99]");
  }
  if (!(omega >= 0.0 && omega <= 1.0)) fail(Errc::InvalidParameter, "omega must be in [0, 1]");
  if (!(delta_n > 0.0 && delta_n < 157.0)) fail(Errc::InvalidParameter, "delta_N must be in (0, 157)");
  if (!std::isfinite(n0)) fail(Errc::InvalidParameter, "N0 must be finite");
}

namespace p1812 {

double inv_cum_norm(double x) {
  if (x == 0.5) return 0.0;
  x = std::clamp(x, 1e-6, 1.0 - 1e-6);
  auto tc = [](double y) {
    constexpr double c0 = 2.515516698, c1 = 0.802853, c2 = 0.010328;
    constexpr double d1 = 1.432788, d2 = 0.189269, d3 = 0.001308;
    const double t = std::sqrt(-2.0 * std::log(y));
    const double c = ((c2 * t + c1) * t + c0) / (((d3 * t + d2) * t + d1) * t + 1.0);
    return t - c;
  };
  return x < 0.5 ? tc(x) : -tc(1.0 - x);
}

double knife_edge_loss(double nu) {
  if (nu <= -0.78) return 0.0;
  return 6.9 + 20.0 * std::log10(std::sqrt((nu - 0.1) * (nu - 0.1) + 1.0) + nu - 0.1);
}

}  // namespace p1812

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kBetaEarthFactor = 3.0;

struct Path {
  std::span<const double> d;  // km
  std::span<const double> h;  // terrain, m
  std::vector<double> g;      // terrain + clutter, m
  double dtot = 0.0;
  double hts = 0.0, hrs = 0.0;  // antenna heights above sea level
  double htg = 0.0, hrg = 0.0;  // antenna heights above ground
  double f = 0.0;               // GHz
  double lambda = 0.0;          // m
};

// Bullington diffraction over an arbitrary profile (heights g, antennas ts/rs
// above sea level) for an effective earth radius ap.
double bullington(std::span<const double> d, std::span<const double> g, double ts, double rs, double ap,
                  double lambda) {
  const std::size_t n = d.size();
  const double dtot = d[n - 1];
  const double ce = 1.0 / ap;
  double stim = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    stim = std::max(stim, (g[i] + 500.0 * ce * d[i] * (dtot - d[i]) - ts) / d[i]);
  }
  const double str = (rs - ts) / dtot;
  double luc = 0.0;
  if (stim < str) {
    double numax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double clearance = g[i] + 500.0 * ce * d[i] * (dtot - d[i]) - (ts * (dtot - d[i]) + rs * d[i]) / dtot;
      numax = std::max(numax, clearance * std::sqrt(0.002 * dtot / (lambda * d[i] * (dtot - d[i]))));
    }
    luc = std::isfinite(numax) ? p1812::knife_edge_loss(numax) : 0.0;
  } else {
    double srim = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      srim = std::max(srim, (g[i] + 500.0 * ce * d[i] * (dtot - d[i]) - rs) / (dtot - d[i]));
    }
    const double dbp = (rs - ts + srim * dtot) / (stim + srim);
    const double nub = (ts + stim * dbp - (ts * (dtot - dbp) + rs * dbp) / dtot) *
                       std::sqrt(0.002 * dtot / (lambda * dbp * (dtot - dbp)));
    luc = p1812::knife_edge_loss(nub);
  }
  return luc + (1.0 - std::exp(-luc / 6.0)) * (10.0 + 0.02 * dtot);
}

// First-term spherical-earth diffraction for one surface type.
double first_term_surface(double adft, double d, double hte, double hre, double f, double eps_r, double sigma,
                          Polarization pol) {
  double k = 0.036 * std::pow(adft * f, -1.0 / 3.0) *
             std::pow((eps_r - 1.0) * (eps_r - 1.0) + std::pow(18.0 * sigma / f, 2.0), -0.25);
  if (pol == Polarization::Vertical) k *= std::sqrt(eps_r * eps_r + std::pow(18.0 * sigma / f, 2.0));
  const double k2 = k * k, k4 = k2 * k2;
  const double beta = (1.0 + 1.6 * k2 + 0.67 * k4) / (1.0 + 4.5 * k2 + 1.53 * k4);
  const double x = 21.88 * beta * std::cbrt(f / (adft * adft)) * d;
  const double fx = x >= 1.6 ? 11.0 + 10.0 * std::log10(x) - 17.6 * x
                             : -20.0 * std::log10(x) - 5.6488 * std::pow(x, 1.425);
  auto height_gain = [&](double h) {
    const double y = 0.9575 * beta * std::cbrt(f * f / adft) * h;
    const double b = beta * y;
    const double gy = b > 2.0 ? 17.6 * std::sqrt(b - 1.1) - 5.0 * std::log10(b - 1.1) - 8.0
                              : 20.0 * std::log10(b + 0.1 * b * b * b);
    return std::max(gy, 2.0 + 20.0 * std::log10(k));
  };
  return -fx - height_gain(hte) - height_gain(hre);
}

double first_term(double adft, double d, double hte, double hre, double f, double omega, Polarization pol) {
  const double land = first_term_surface(adft, d, hte, hre, f, 22.0, 0.003, pol);
  const double sea = first_term_surface(adft, d, hte, hre, f, 80.0, 5.0, pol);
  return omega * sea + (1.0 - omega) * land;
}

double spherical_earth(double ap, double d, double hte, double hre, double f, double lambda, double omega,
                       Polarization pol) {
  const double dlos = std::sqrt(2.0 * ap) * (std::sqrt(0.001 * hte) + std::sqrt(0.001 * hre));
  if (d >= dlos) return first_term(ap, d, hte, hre, f, omega, pol);
  const double c = (hte - hre) / (hte + hre);
  const double m = 250.0 * d * d / (ap * (hte + hre));
  const double b = 2.0 * std::sqrt((m + 1.0) / (3.0 * m)) *
                   std::cos(M_PI / 3.0 + std::acos(1.5 * c * std::sqrt(3.0 * m / std::pow(m + 1.0, 3.0))) / 3.0);
  const double dse1 = 0.5 * d * (1.0 + b);
  const double dse2 = d - dse1;
  const double hse = ((hte - 500.0 * dse1 * dse1 / ap) * dse2 + (hre - 500.0 * dse2 * dse2 / ap) * dse1) / d;
  const double hreq = 17.456 * std::sqrt(dse1 * dse2 * lambda / d);
  if (hse > hreq) return 0.0;
  const double aem = 500.0 * std::pow(d / (std::sqrt(hte) + std::sqrt(hre)), 2.0);
  const double ldft = first_term(aem, d, hte, hre, f, omega, pol);
  if (ldft < 0.0) return 0.0;
  return (1.0 - hse / hreq) * ldft;
}

struct SmoothEarth {
  double hte_diff = 0.0, hre_diff = 0.0;  // effective heights for diffraction
  double hst = 0.0, hsr = 0.0;            // smooth surface for ducting
  double hte = 0.0, hre = 0.0;            // effective heights for ducting
};

SmoothEarth smooth_earth(const Path& p) {
  const std::size_t n = p.d.size();
  double v1 = 0.0, v2 = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double dd = p.d[i] - p.d[i - 1];
    v1 += dd * (p.h[i] + p.h[i - 1]);
    v2 += dd * (p.h[i] * (2.0 * p.d[i] + p.d[i - 1]) + p.h[i - 1] * (p.d[i] + 2.0 * p.d[i - 1]));
  }
  const double dtot = p.dtot;
  const double hst = (2.0 * v1 * dtot - v2) / (dtot * dtot);
  const double hsr = (v2 - v1 * dtot) / (dtot * dtot);

  double hobs = -std::numeric_limits<double>::infinity();
  double aobt = -std::numeric_limits<double>::infinity();
  double aobr = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hi = p.g[i] - (p.hts * (dtot - p.d[i]) + p.hrs * p.d[i]) / dtot;
    hobs = std::max(hobs, hi);
    aobt = std::max(aobt, hi / p.d[i]);
    aobr = std::max(aobr, hi / (dtot - p.d[i]));
  }
  double hstp = hst, hsrp = hsr;
  if (hobs > 0.0) {
    const double gt = aobt / (aobt + aobr);
    const double gr = aobr / (aobt + aobr);
    hstp = hst - hobs * gt;
    hsrp = hsr - hobs * gr;
  }
  SmoothEarth s;
  s.hte_diff = p.hts - std::min(hstp, p.h[0]);
  s.hre_diff = p.hrs - std::min(hsrp, p.h[n - 1]);
  s.hst = std::min(hst, p.h[0]);
  s.hsr = std::min(hsr, p.h[n - 1]);
  s.hte = p.htg + p.h[0] - s.hst;
  s.hre = p.hrg + p.h[n - 1] - s.hsr;
  return s;
}

struct Horizons {
  bool trans_horizon = false;
  double theta_t = 0.0, theta_r = 0.0, theta = 0.0;  // mrad
  double dlt = 0.0, dlr = 0.0;                       // km
  std::size_t ilt = 0, ilr = 0;
};

Horizons horizons(const Path& p, double ae) {
  const std::size_t n = p.d.size();
  const double dtot = p.dtot;
  Horizons hz;
  double theta_max = -std::numeric_limits<double>::infinity();
  std::size_t imax = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double th = (p.g[i] - p.hts) / p.d[i] - 1000.0 * p.d[i] / (2.0 * ae);
    if (th > theta_max) {
      theta_max = th;
      imax = i;
    }
  }
  const double theta_td = (p.hrs - p.hts) / dtot - 1000.0 * dtot / (2.0 * ae);
  hz.trans_horizon = theta_max > theta_td;
  if (hz.trans_horizon) {
    hz.theta_t = theta_max;
    hz.ilt = imax;
    hz.dlt = p.d[imax];
    double theta_r = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double th = (p.g[i] - p.hrs) / (dtot - p.d[i]) - 1000.0 * (dtot - p.d[i]) / (2.0 * ae);
      if (th > theta_r) {
        theta_r = th;
        hz.ilr = i;
      }
    }
    hz.theta_r = theta_r;
    hz.dlr = dtot - p.d[hz.ilr];
  } else {
    hz.theta_t = theta_td;
    hz.theta_r = (p.hts - p.hrs) / dtot - 1000.0 * dtot / (2.0 * ae);
    const double ce = 1.0 / ae;
    double numax = -std::numeric_limits<double>::infinity();
    std::size_t inu = n / 2;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double clearance =
          p.g[i] + 500.0 * ce * p.d[i] * (dtot - p.d[i]) - (p.hts * (dtot - p.d[i]) + p.hrs * p.d[i]) / dtot;
      const double nu = clearance * std::sqrt(0.002 * dtot / (p.lambda * p.d[i] * (dtot - p.d[i])));
      if (nu > numax) {
        numax = nu;
        inu = i;
      }
    }
    hz.ilt = hz.ilr = inu;
    hz.dlt = p.d[inu];
    hz.dlr = dtot - hz.dlt;
  }
  hz.theta = 1000.0 * dtot / ae + hz.theta_t + hz.theta_r;
  return hz;
}

double diffraction_loss(const Path& p, const SmoothEarth& se, double ap, double omega, Polarization pol) {
  const std::vector<double> zeros(p.d.size(), 0.0);
  const double lbulla = bullington(p.d, p.g, p.hts, p.hrs, ap, p.lambda);
  const double lbulls = bullington(p.d, zeros, se.hte_diff, se.hre_diff, ap, p.lambda);
  const double ldsph = spherical_earth(ap, p.dtot, se.hte_diff, se.hre_diff, p.f, p.lambda, omega, pol);
  return lbulla + std::max(ldsph - lbulls, 0.0);
}

}  // namespace

P1812Breakdown p1812_breakdown(const PathProfile& profile, const LinkParams& link, const ModelEnvironment& env) {
  link.validate();
  env.validate();
  profile.validate();
  const std::size_t n = profile.size();
  Path p;
  p.d = profile.distances_km;
  p.h = profile.terrain_m;
  p.dtot = profile.distances_km[n - 1];
  if (!(p.dtot >= kMinPathLengthKm && p.dtot <= 3000.0)) {
    fail(Errc::DistanceOutOfRange, "path length " + std::to_string(p.dtot) + " km outside [0.25, 3000]");
  }
  p.g.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.g[i] = profile.terrain_m[i] + profile.clutter_m[i];
  p.htg = link.tx_height_m;
  p.hrg = link.rx_height_m;
  p.hts = p.h[0] + p.htg;
  p.hrs = p.h[n - 1] + p.hrg;
  p.f = link.frequency_mhz / 1000.0;
  p.lambda = 0.2998 / p.f;

  const double pct = env.time_percent;
  const double omega = env.omega;
  const double dtot = p.dtot;

  // Anomalous-propagation time percentage beta0.
  const double phi = 0.5 * (link.tx.lat + link.rx.lat);
  const double dlm = dtot * (1.0 - omega);  // longest continuous inland section (all-land default)
  const double dtm = dlm;
  const double tau = 1.0 - std::exp(-4.12e-4 * std::pow(dlm, 2.41));
  const double mu1 = std::pow(std::pow(10.0, -dtm / (16.0 - 6.6 * tau)) + std::pow(10.0, -5.0 * (0.496 + 0.354 * tau)), 0.2);
  double beta0;
  if (std::abs(phi) <= 70.0) {
    const double mu4 = std::pow(10.0, (-0.935 + 0.0176 * std::abs(phi)) * std::log10(mu1));
    beta0 = std::pow(10.0, -0.015 * std::abs(phi) + 1.67) * mu1 * mu4;
  } else {
    const double mu4 = std::pow(10.0, 0.3 * std::log10(mu1));
    beta0 = 4.17 * mu1 * mu4;
  }

  const double k50 = 157.0 / (157.0 - env.delta_n);
  const double ae = kEarthRadiusKm * k50;
  const double abeta = kEarthRadiusKm * kBetaEarthFactor;

  const Horizons hz = horizons(p, ae);
  const SmoothEarth se = smooth_earth(p);

  // Line-of-sight loss with multipath/focusing corrections.
  const double dfs = std::sqrt(dtot * dtot + std::pow((p.hts - p.hrs) / 1000.0, 2.0));
  const double lbfs = 92.4 + 20.0 * std::log10(p.f) + 20.0 * std::log10(dfs);
  const double esp = 2.6 * (1.0 - std::exp(-0.1 * (hz.dlt + hz.dlr))) * std::log10(pct / 50.0);
  const double esbeta = 2.6 * (1.0 - std::exp(-0.1 * (hz.dlt + hz.dlr))) * std::log10(beta0 / 50.0);
  const double lb0p = lbfs + esp;
  const double lb0beta = lbfs + esbeta;

  // Diffraction.
  const double ld50 = diffraction_loss(p, se, ae, omega, link.polarization);
  double fi = 1.0;
  if (pct > beta0) fi = p1812::inv_cum_norm(pct / 100.0) / p1812::inv_cum_norm(beta0 / 100.0);
  double ldp = ld50;
  if (pct < 50.0) {
    const double ldbeta = diffraction_loss(p, se, abeta, omega, link.polarization);
    ldp = ld50 + fi * (ldbeta - ld50);
  }
  const double lbd50 = lbfs + ld50;
  const double lbd = lb0p + ldp;

  // Troposcatter.
  const double lf = 25.0 * std::log10(p.f) - 2.5 * std::pow(std::log10(p.f / 2.0), 2.0);
  const double lbs = 190.1 + lf + 20.0 * std::log10(dtot) + 0.573 * hz.theta - 0.15 * env.n0 -
                     10.125 * std::pow(std::log10(50.0 / pct), 0.7);

  // Ducting / layer reflection.
  const double alf = p.f < 0.5 ? 45.375 - 137.0 * p.f + 92.5 * p.f * p.f : 0.0;
  auto site_shielding = [&](double theta, double dl) {
    const double th2 = theta - 0.1 * dl;
    if (th2 <= 0.0) return 0.0;
    return 20.0 * std::log10(1.0 + 0.361 * th2 * std::sqrt(p.f * dl)) + 0.264 * th2 * std::cbrt(p.f);
  };
  const double ast = site_shielding(hz.theta_t, hz.dlt);
  const double asr = site_shielding(hz.theta_r, hz.dlr);
  const double af = 102.45 + 20.0 * std::log10(p.f) + 20.0 * std::log10(hz.dlt + hz.dlr) + alf + ast + asr;
  const double gamma_d = 5e-5 * ae * std::cbrt(p.f);
  const double tht = hz.theta_t <= 0.1 * hz.dlt ? hz.theta_t : 0.1 * hz.dlt;
  const double thr = hz.theta_r <= 0.1 * hz.dlr ? hz.theta_r : 0.1 * hz.dlr;
  const double theta_prime = 1000.0 * dtot / ae + tht + thr;
  const double alpha = -0.6 - 3.5e-9 * std::pow(dtot, 3.1) * tau;
  const double mu2 = std::min(1.0, std::pow(500.0 / ae * dtot * dtot / std::pow(std::sqrt(se.hte) + std::sqrt(se.hre), 2.0), alpha));
  double hm = -std::numeric_limits<double>::infinity();
  const double slope = (se.hsr - se.hst) / dtot;
  for (std::size_t i = std::min(hz.ilt, hz.ilr); i <= std::max(hz.ilt, hz.ilr); ++i) {
    hm = std::max(hm, p.g[i] - (se.hst + slope * p.d[i]));
  }
  double mu3 = 1.0;
  if (hm > 10.0) {
    const double di = std::min(dtot - hz.dlt - hz.dlr, 40.0);
    mu3 = std::exp(-4.6e-5 * (hm - 10.0) * (43.0 + 6.0 * di));
  }
  const double beta = beta0 * mu2 * mu3;
  const double lb = std::log10(beta);
  const double gamma = 1.076 / std::pow(2.0058 - lb, 1.012) *
                       std::exp(-(9.51 - 4.8 * lb + 0.198 * lb * lb) * 1e-6 * std::pow(dtot, 1.13));
  const double ap = -12.0 + (1.2 + 3.7e-3 * dtot) * std::log10(pct / beta) + 12.0 * std::pow(pct / beta, gamma);
  const double lba = af + gamma_d * theta_prime + ap;

  // Combination.
  constexpr double eta = 2.5;
  constexpr double big_theta = 0.3, xi = 0.8;
  constexpr double dsw = 20.0, kappa = 0.5;
  const double fj = 1.0 - 0.5 * (1.0 + std::tanh(3.0 * xi * (hz.theta - big_theta) / big_theta));
  const double fk = 1.0 - 0.5 * (1.0 + std::tanh(3.0 * kappa * (dtot - dsw) / dsw));
  const double lminb0p = pct < beta0 ? lb0p + (1.0 - omega) * ldp
                                     : lbd50 + (lb0beta + (1.0 - omega) * ldp - lbd50) * fi;
  const double lminbap = eta * std::log(std::exp(lba / eta) + std::exp(lb0p / eta));
  const double lbda = lminbap > lbd ? lbd : lminbap + (lbd - lminbap) * fk;
  const double lbam = lbda + (lminb0p - lbda) * fj;
  const double lbc = -5.0 * std::log10(std::pow(10.0, -0.2 * lbs) + std::pow(10.0, -0.2 * lbam));

  // Location variability (outdoor, 100 m area).
  const double sigma_l = 0.5 * (0.024 * p.f + 0.52) * std::pow(100.0, 0.28);
  const double lloc = 0.0;
  const double lbl = lbc + lloc - p1812::inv_cum_norm(env.location_percent / 100.0) * sigma_l;

  P1812Breakdown out;
  out.basic_loss_db = std::max(lb0p, lbl);
  out.free_space_db = lbfs;
  out.los_loss_db = lb0p;
  out.diffraction_db = ldp;
  out.troposcatter_db = lbs;
  out.ducting_db = lba;
  out.combined_db = lbc;
  out.angular_distance_mrad = hz.theta;
  out.beta0_percent = beta0;
  out.effective_radius_km = ae;
  out.trans_horizon = hz.trans_horizon;
  return out;
}

double path_loss_p1812(const PathProfile& profile, const LinkParams& link, const ModelEnvironment& env) {
  return p1812_breakdown(profile, link, env).basic_loss_db;
}

ModeLosses path_loss_modes(const PathProfile& profile, const LinkParams& link, const ModelEnvironment& env) {
  ModeLosses m;
  m.with_clutter_db = path_loss_p1812(profile, link, env);
  m.no_clutter_db = path_loss_p1812(strip_clutter(profile), link, env);
  return m;
}

}  // namespace safe
