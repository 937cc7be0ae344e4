#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "safe/kv_config.hpp"
#include "safe/predictor.hpp"

namespace safe::cli {

inline constexpr const char* kConfigEnvVar = "SAFE_CONFIG";

// Every tunable setting as key = value strings. Layers are applied in order
// built-in defaults, config file base section, config file preset section,
// command-line flags; later layers win.
class Settings {
 public:
  static Settings defaults();

  void set(const std::string& key, const std::string& value);  // ParseError for unknown keys
  void merge(const KeyValueDocument::Section& section);
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  // Built-in presets: "semi-rural" (20 dB) and "heavily-forested" (30 dB).
  static const KeyValueDocument::Section* builtin_preset(std::string_view name);

  // Flat text with one `key = value` line per setting, in key order.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

// Settings converted into typed form.
struct RunConfig {
  SafeConfig safe;
  Polarization polarization = Polarization::Vertical;
  std::string ret_species;
  LeafState ret_leaf_state = LeafState::InLeaf;
  double ret_frequency_ghz = 3.5;
  std::optional<std::filesystem::path> ret_table;
  double tree_growth_rate_m_per_year = 0.5;
  std::optional<int> survey_year;       // elevation data
  std::optional<int> measurement_year;  // drive test
  std::size_t threads = 0;

  // rate * (survey_year - measurement_year) when both years are set, else 0.
  // NegativeInput when the survey predates the measurements.
  double tree_growth_offset_m() const;
};

RunConfig to_run_config(const Settings& s);

// Loads the layered settings. `config_path` falls back to $SAFE_CONFIG; a
// missing explicit file is FileMissing. Returns the file actually used.
struct ResolvedSettings {
  Settings settings;
  std::optional<std::filesystem::path> config_file;
};

ResolvedSettings resolve_settings(const std::optional<std::filesystem::path>& config_path,
                                  const std::optional<std::string>& preset,
                                  const std::map<std::string, std::string>& flag_overrides);

}  // namespace safe::cli
