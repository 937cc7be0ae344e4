#include "safe/ret.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "safe/error.hpp"
#include "safe/kv_config.hpp"

namespace safe {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kEarthRadiusM = 6371.0e3;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// ln(1 - e^{-x}) for x > 0.
double log1m_exp(double x) { return std::log(-std::expm1(-x)); }

double transport_loss(const TransportCoefficients& c, double depth_m, double theta_deg) {
  const double tau = c.extinction_per_m * depth_m;
  const double forward = c.albedo * c.forward_ratio;

  const double log_coherent = -tau;

  // Forward lobe orders k >= 1: Poisson weights of the scattered fraction,
  // each passing the receiver beam with 1 - exp(-x^2 / k).
  double log_forward = kNegInf;
  const double lambda = forward * tau;
  if (lambda > 0.0) {
    const double x2 = std::pow(c.rx_beamwidth_deg / c.phase_beamwidth_deg, 2);
    const double log_lambda = std::log(lambda);
    double peak = kNegInf;
    for (int k = 1;; ++k) {
      const double lt = -tau + k * log_lambda - std::lgamma(k + 1.0) + log1m_exp(x2 / k);
      log_forward = log_add(log_forward, lt);
      peak = std::max(peak, lt);
      if (k > lambda && lt < peak - 50.0) break;
    }
  }

  // Diffuse field: fed by the non-forward scattered power, leaking out of the
  // canopy faster at steeper entry angles.
  double log_diffuse = kNegInf;
  const double gain = c.albedo * (1.0 - c.forward_ratio) * std::pow(c.rx_beamwidth_deg * kDegToRad, 2) / 16.0;
  if (gain > 0.0 && tau > 0.0) {
    const double a = 1.0 - forward;
    const double b = std::sqrt(3.0 * (1.0 - c.albedo)) * std::sin(theta_deg * kDegToRad) + c.lateral_escape;
    const double lo = std::min(a, b);
    const double gap = std::abs(a - b);
    if (gap * tau < 1e-12) {
      log_diffuse = std::log(gain) + std::log(tau) - a * tau;
    } else {
      log_diffuse = std::log(gain) - lo * tau + log1m_exp(gap * tau) - std::log(gap);
    }
  }

  const double total = log_add(log_add(log_coherent, log_forward), log_diffuse);
  return -10.0 * total / std::numbers::ln10;
}

double dual_slope_loss(const DualSlopeCoefficients& c, double depth_m) {
  return std::min(c.initial_db_per_m * depth_m,
                  c.initial_db_per_m * c.knee_depth_m + c.final_db_per_m * (depth_m - c.knee_depth_m));
}

constexpr std::string_view kBuiltinTable = R"(# Foliage loss coefficient sets.
# Section header: [species leaf-state frequency-GHz]

[american-plane in-leaf 3.5]
model = transport
albedo = 0.8
phase_beamwidth_deg = 50
extinction_per_m = 0.55
forward_ratio = 0.8
rx_beamwidth_deg = 30
lateral_escape = 0.05

[generic in-leaf 3.5]
model = dual-slope
initial_db_per_m = 2.0
final_db_per_m = 0.5
knee_depth_m = 10.0
)";

}  // namespace

std::string_view to_string(LeafState s) { return s == LeafState::InLeaf ? "in-leaf" : "out-of-leaf"; }

LeafState parse_leaf_state(std::string_view s) {
  if (s == "in-leaf") return LeafState::InLeaf;
  if (s == "out-of-leaf") return LeafState::OutOfLeaf;
  fail(Errc::ParseError, "unknown leaf state '" + std::string(s) + "'");
}

std::string_view to_string(RetModelKind k) { return k == RetModelKind::Transport ? "transport" : "dual-slope"; }

RetModelKind parse_ret_model(std::string_view s) {
  if (s == "transport") return RetModelKind::Transport;
  if (s == "dual-slope") return RetModelKind::DualSlope;
  fail(Errc::ParseError, "unknown RET model '" + std::string(s) + "'");
}

RetParameters RetParameters::american_plane_in_leaf() { return RetParameters{}; }

void RetParameters::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(Errc::InvalidParameter, what);
  };
  require(frequency_ghz > 0.0, "RET frequency must be > 0");
  if (model == RetModelKind::Transport) {
    const auto& c = transport;
    require(c.albedo >= 0.0 && c.albedo < 1.0, "albedo must be in [0, 1)");
    require(c.phase_beamwidth_deg > 0.0 && c.phase_beamwidth_deg <= 180.0, "phase beamwidth must be in (0, 180]");
    require(c.extinction_per_m > 0.0 && std::isfinite(c.extinction_per_m), "extinction must be > 0");
    require(c.forward_ratio >= 0.0 && c.forward_ratio <= 1.0, "forward ratio must be in [0, 1]");
    require(c.rx_beamwidth_deg > 0.0 && c.rx_beamwidth_deg <= 180.0, "receiver beamwidth must be in (0, 180]");
    require(c.lateral_escape >= 0.0 && std::isfinite(c.lateral_escape), "lateral escape must be >= 0");
  } else {
    const auto& c = dual_slope;
    require(c.final_db_per_m >= 0.0, "final slope must be >= 0");
    require(c.initial_db_per_m >= c.final_db_per_m, "initial slope must be >= final slope");
    require(c.knee_depth_m >= 0.0 && std::isfinite(c.knee_depth_m), "knee depth must be >= 0");
  }
  for (double theta = 0.0; theta <= 90.0; theta += 15.0) {
    double previous = ret_loss(*this, 0.0, theta);
    require(previous == 0.0, "foliage loss must be zero at zero depth");
    for (int d = 1; d <= 500; ++d) {
      const double loss = ret_loss(*this, d, theta);
      require(std::isfinite(loss) && loss >= previous - 1e-9, "foliage loss must not decrease with depth");
      previous = loss;
    }
  }
}

std::string_view builtin_ret_table_text() { return kBuiltinTable; }

RetCoefficientTable RetCoefficientTable::builtin() { return parse(kBuiltinTable); }

RetCoefficientTable RetCoefficientTable::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::FileMissing, "no such file: " + path.string());
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

RetCoefficientTable RetCoefficientTable::parse(std::string_view text) {
  const auto doc = KeyValueDocument::parse(text);
  RetCoefficientTable table;
  for (const auto& name : doc.section_names()) {
    const auto& sec = *doc.find(name);
    if (name.empty()) {
      if (!sec.empty()) fail(Errc::ParseError, "RET coefficients must appear inside a [species state band] section");
      continue;
    }
    std::istringstream words(name);
    std::string species, state, band, extra;
    if (!(words >> species >> state >> band) || (words >> extra)) {
      fail(Errc::ParseError, "RET section '" + name + "' must be [species leaf-state frequency-GHz]");
    }
    RetParameters p;
    p.species_label = species;
    p.leaf_state = parse_leaf_state(state);
    p.frequency_ghz = parse_double(band, "RET frequency band");
    auto num = [&](const char* key, double& out) {
      if (auto it = sec.find(key); it != sec.end()) out = parse_double(it->second, key);
    };
    for (const auto& [key, value] : sec) {
      static const char* known[] = {"model",         "albedo",           "phase_beamwidth_deg", "extinction_per_m",
                                    "forward_ratio", "rx_beamwidth_deg", "lateral_escape",      "initial_db_per_m",
                                    "final_db_per_m", "knee_depth_m"};
      if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; })) {
        fail(Errc::ParseError, "unknown RET key '" + key + "' in [" + name + "]");
      }
    }
    if (auto it = sec.find("model"); it != sec.end()) p.model = parse_ret_model(it->second);
    num("albedo", p.transport.albedo);
    num("phase_beamwidth_deg", p.transport.phase_beamwidth_deg);
    num("extinction_per_m", p.transport.extinction_per_m);
    num("forward_ratio", p.transport.forward_ratio);
    num("rx_beamwidth_deg", p.transport.rx_beamwidth_deg);
    num("lateral_escape", p.transport.lateral_escape);
    num("initial_db_per_m", p.dual_slope.initial_db_per_m);
    num("final_db_per_m", p.dual_slope.final_db_per_m);
    num("knee_depth_m", p.dual_slope.knee_depth_m);
    p.validate();
    table.entries_.push_back(std::move(p));
  }
  return table;
}

RetParameters RetCoefficientTable::lookup(std::string_view species, LeafState state, double frequency_ghz) const {
  for (const auto& e : entries_) {
    if (e.species_label == species && e.leaf_state == state &&
        std::abs(e.frequency_ghz - frequency_ghz) <= 0.01 * e.frequency_ghz) {
      return e;
    }
  }
  std::ostringstream msg;
  msg << "no calibrated foliage coefficients for " << species << ' ' << to_string(state) << " at " << frequency_ghz
      << " GHz";
  fail(Errc::UncalibratedParameters, msg.str());
}

double ret_loss(const RetParameters& params, double depth_m, double theta_deg) {
  if (!(depth_m >= 0.0)) fail(Errc::NegativeDepth, "foliage depth must be >= 0");
  if (!(theta_deg >= 0.0 && theta_deg <= 90.0)) fail(Errc::ThetaOutOfRange, "entry angle must be in [0, 90] degrees");
  if (depth_m == 0.0) return 0.0;
  return params.model == RetModelKind::Transport ? transport_loss(params.transport, depth_m, theta_deg)
                                                 : dual_slope_loss(params.dual_slope, depth_m);
}

std::vector<std::pair<double, double>> ret_curve(const RetParameters& params, double theta_deg, double max_depth_m,
                                                 double step_m) {
  if (!(step_m > 0.0)) fail(Errc::NonpositiveStep, "curve step must be > 0");
  if (!(max_depth_m >= 0.0)) fail(Errc::NegativeDepth, "maximum depth must be >= 0");
  std::vector<std::pair<double, double>> out;
  const auto n = static_cast<std::size_t>(std::floor(max_depth_m / step_m + 1e-9));
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double d = step_m * static_cast<double>(i);
    out.emplace_back(d, ret_loss(params, d, theta_deg));
  }
  return out;
}

double clamp_ret(double raw_loss_db, RetLimit limit) {
  if (!(limit.limit_db >= 0.0)) fail(Errc::InvalidParameter, "RET limit must be >= 0");
  return std::min(raw_loss_db, limit.limit_db);
}

FoliageIntersection intersect_ray_with_clutter(const ElevationStack& stack, const Terminal& tx, const Terminal& rx,
                                               double step_m) {
  if (!(step_m > 0.0)) fail(Errc::NonpositiveStep, "intersection step must be > 0");
  const GeodesicLine line(tx.position, rx.position);
  const double length = line.length_m();
  FoliageIntersection out;
  out.path_length_m = length;

  const double h_tx = stack.terrain_height_at(tx.position) + tx.height_agl_m;
  const double h_rx = stack.terrain_height_at(rx.position) + rx.height_agl_m;
  const double two_ae = 2.0 * kEffectiveEarthFactor * kEarthRadiusM;
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(length / step_m - 1e-9)));
  const double dx = length / static_cast<double>(n);
  const double grade = (h_rx - h_tx) / length;

  bool inside_prev = false;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = (static_cast<double>(j) + 0.5) * dx;
    const ColumnSample col = stack.column_at(line.position(x));
    bool inside = false;
    if (!col.high_resolution) {
      out.fallback_used = true;
    } else {
      const double ray = h_tx + grade * x - x * (length - x) / two_ae;
      inside = col.clutter_m > 0.0 && ray > col.terrain_m && ray < col.terrain_m + col.clutter_m;
      if (inside) {
        const double slope = grade - (length - 2.0 * x) / two_ae;
        out.total_depth_m += dx * std::sqrt(1.0 + slope * slope);
        if (!out.theta_deg) out.theta_deg = std::atan(std::abs(slope)) / kDegToRad;
        if (inside_prev) {
          out.segments.back().second = x + 0.5 * dx;
        } else {
          out.segments.emplace_back(x - 0.5 * dx, x + 0.5 * dx);
        }
      }
    }
    inside_prev = inside;
  }
  return out;
}

}  // namespace safe
