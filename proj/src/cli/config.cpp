#include "safe/cli/config.hpp"

#include <cstdlib>
#include <sstream>

#include "safe/error.hpp"

namespace safe::cli {

namespace {

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> values = {
      {"mode", "safe"},
      {"clutter_class", "urban-trees-forest"},
      {"clutter_height_m", ""},  // empty: the class's representative height
      {"ret_limit_db", "20"},
      {"ret_species", "american-plane"},
      {"ret_leaf_state", "in-leaf"},
      {"ret_frequency_ghz", "3.5"},
      {"ret_table", ""},
      {"time_percent", "50"},
      {"location_percent", "50"},
      {"delta_n", "40"},
      {"n0", "325"},
      {"omega", "0"},
      {"polarization", "vertical"},
      {"detection_threshold_m", "4"},
      {"profile_spacing_m", "30"},
      {"intersection_step_m", "1"},
      {"rx_height_m", "2.5"},
      {"tree_growth_rate_m_per_year", "0.5"},
      {"survey_year", ""},
      {"measurement_year", ""},
      {"threads", "0"},
  };
  return values;
}

int parse_int(const std::string& s, const std::string& key) {
  const double v = parse_double(s, key);
  if (v != static_cast<double>(static_cast<long long>(v))) fail(Errc::ParseError, key + " must be an integer");
  return static_cast<int>(v);
}

}  // namespace

Settings Settings::defaults() {
  Settings s;
  s.values_ = default_values();
  return s;
}

void Settings::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) fail(Errc::ParseError, "unknown setting '" + key + "'");
  it->second = value;
}

void Settings::merge(const KeyValueDocument::Section& section) {
  for (const auto& [k, v] : section) {
    if (k == "preset") continue;
    set(k, v);
  }
}

const std::string& Settings::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(Errc::ParseError, "unknown setting '" + key + "'");
  return it->second;
}

const KeyValueDocument::Section* Settings::builtin_preset(std::string_view name) {
  static const KeyValueDocument::Section semi_rural = {{"ret_limit_db", "20"}};
  static const KeyValueDocument::Section heavily_forested = {{"ret_limit_db", "30"}};
  if (name == "semi-rural") return &semi_rural;
  if (name == "heavily-forested") return &heavily_forested;
  return nullptr;
}

std::string Settings::to_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  return out.str();
}

double RunConfig::tree_growth_offset_m() const {
  if (!survey_year || !measurement_year) return 0.0;
  if (*survey_year < *measurement_year) {
    fail(Errc::NegativeInput, "survey year precedes the measurement year");
  }
  if (!(tree_growth_rate_m_per_year >= 0.0)) fail(Errc::NegativeInput, "tree growth rate must be >= 0");
  return tree_growth_rate_m_per_year * static_cast<double>(*survey_year - *measurement_year);
}

RunConfig to_run_config(const Settings& s) {
  auto num = [&](const char* key) { return parse_double(s.get(key), key); };
  RunConfig rc;
  SafeConfig& c = rc.safe;
  c.mode = parse_prediction_mode(s.get("mode"));
  c.clutter_class = ClutterClass::standard(parse_clutter_category(s.get("clutter_class")));
  if (!s.get("clutter_height_m").empty()) c.clutter_class.representative_height_m = num("clutter_height_m");
  c.ret_limit = RetLimit{num("ret_limit_db")};
  c.environment.time_percent = num("time_percent");
  c.environment.location_percent = num("location_percent");
  c.environment.delta_n = num("delta_n");
  c.environment.n0 = num("n0");
  c.environment.omega = num("omega");
  c.detection_threshold_m = num("detection_threshold_m");
  c.profile_spacing_m = num("profile_spacing_m");
  c.intersection_step_m = num("intersection_step_m");
  c.rx_height_m = num("rx_height_m");

  const std::string& pol = s.get("polarization");
  if (pol == "vertical") {
    rc.polarization = Polarization::Vertical;
  } else if (pol == "horizontal") {
    rc.polarization = Polarization::Horizontal;
  } else {
    fail(Errc::ParseError, "polarization must be vertical or horizontal");
  }
  rc.ret_species = s.get("ret_species");
  rc.ret_leaf_state = parse_leaf_state(s.get("ret_leaf_state"));
  rc.ret_frequency_ghz = num("ret_frequency_ghz");
  if (!s.get("ret_table").empty()) rc.ret_table = s.get("ret_table");
  rc.tree_growth_rate_m_per_year = num("tree_growth_rate_m_per_year");
  if (!s.get("survey_year").empty()) rc.survey_year = parse_int(s.get("survey_year"), "survey_year");
  if (!s.get("measurement_year").empty()) {
    rc.measurement_year = parse_int(s.get("measurement_year"), "measurement_year");
  }
  const int threads = parse_int(s.get("threads"), "threads");
  if (threads < 0) fail(Errc::InvalidParameter, "threads must be >= 0");
  rc.threads = static_cast<std::size_t>(threads);

  const RetCoefficientTable table = rc.ret_table ? RetCoefficientTable::load(*rc.ret_table)
                                                 : RetCoefficientTable::builtin();
  c.ret_params = table.lookup(rc.ret_species, rc.ret_leaf_state, rc.ret_frequency_ghz);
  c.validate();
  rc.tree_growth_offset_m();
  return rc;
}

ResolvedSettings resolve_settings(const std::optional<std::filesystem::path>& config_path,
                                  const std::optional<std::string>& preset,
                                  const std::map<std::string, std::string>& flag_overrides) {
  ResolvedSettings out{Settings::defaults(), std::nullopt};
  if (config_path) {
    out.config_file = config_path;
  } else if (const char* env = std::getenv(kConfigEnvVar); env && *env) {
    out.config_file = std::filesystem::path(env);
  }

  std::optional<std::string> preset_name = preset;
  std::optional<KeyValueDocument> doc;
  if (out.config_file) {
    doc = KeyValueDocument::load(*out.config_file);
    const auto* base = doc->find("");
    out.settings.merge(*base);
    if (!preset_name) {
      if (auto it = base->find("preset"); it != base->end() && !it->second.empty()) preset_name = it->second;
    }
  }
  if (preset_name) {
    const KeyValueDocument::Section* section = doc ? doc->find("preset " + *preset_name) : nullptr;
    if (!section) section = Settings::builtin_preset(*preset_name);
    if (!section) fail(Errc::InvalidParameter, "unknown preset '" + *preset_name + "'");
    out.settings.merge(*section);
  }
  for (const auto& [k, v] : flag_overrides) out.settings.set(k, v);
  return out;
}

}  // namespace safe::cli
