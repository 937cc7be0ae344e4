#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "safe/cli/cli.hpp"
#include "safe/cli/config.hpp"
#include "safe/cli/manifest.hpp"
#include "safe/elevation.hpp"
#include "safe/predictor.hpp"
#include "safe/raster.hpp"
#include "safe/validation.hpp"

namespace safe::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Options that map onto a setting key; everything else is a command argument.
struct SettingFlag {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr SettingFlag kSettingFlags[] = {
    {"--mode", "mode", "safe | p1812-clutter | p1812-no-clutter"},
    {"--ret-limit", "ret_limit_db", "foliage loss limit in dB"},
    {"--pol", "polarization", "vertical | horizontal"},
    {"--clutter-class", "clutter_class", "class for the p1812-clutter baseline"},
    {"--rx-height", "rx_height_m", "receiver height for coverage cells (m)"},
    {"--tree-growth-rate", "tree_growth_rate_m_per_year", "canopy growth rate (m/yr)"},
    {"--survey-year", "survey_year", "year the elevation data was collected"},
    {"--measurement-year", "measurement_year", "year of the measurements"},
    {"--ret-table", "ret_table", "foliage coefficient table file"},
    {"--threads", "threads", "worker threads (0 = all cores)"},
};

struct Options {
  std::string command;
  std::optional<std::string> config;
  std::optional<std::string> preset;
  std::string out_dir = "safe_output";
  std::map<std::string, std::string> setting_flags;  // flag -> value
  std::map<std::string, std::string> args;           // flag -> value
};

// Command arguments per subcommand: flag, help, required.
struct ArgSpec {
  const char* flag;
  const char* help;
  bool required;
};

const std::map<std::string, std::vector<ArgSpec>>& command_args() {
  static const std::map<std::string, std::vector<ArgSpec>> specs = {
      {"predict",
       {{"--dtm", "terrain GeoTIFF", true},
        {"--dsm", "surface GeoTIFF", true},
        {"--fallback-dtm", "coarse terrain GeoTIFF", false},
        {"--tx", "transmitter lat,lon,height_m", true},
        {"--rx", "receiver lat,lon[,height_m]", true},
        {"--freq", "frequency in MHz", true}}},
      {"coverage",
       {{"--dtm", "terrain GeoTIFF", true},
        {"--dsm", "surface GeoTIFF", true},
        {"--fallback-dtm", "coarse terrain GeoTIFF", false},
        {"--tx", "transmitter lat,lon,height_m", true},
        {"--freq", "frequency in MHz", true},
        {"--region", "south,west,north,east in degrees", true},
        {"--resolution", "cell size in metres", true},
        {"--raster", "also write a pl_safe GeoTIFF with this file name", false}}},
      {"profile",
       {{"--dtm", "terrain GeoTIFF", true},
        {"--dsm", "surface GeoTIFF", true},
        {"--fallback-dtm", "coarse terrain GeoTIFF", false},
        {"--tx", "transmitter lat,lon[,height_m]", true},
        {"--rx", "receiver lat,lon[,height_m]", true}}},
      {"ret-curve",
       {{"--theta", "entry angle in degrees (default 30)", false},
        {"--max-depth", "largest depth in metres (default 100)", false},
        {"--step", "depth step in metres (default 1)", false}}},
      {"validate",
       {{"--dtm", "terrain GeoTIFF", true},
        {"--dsm", "surface GeoTIFF", true},
        {"--fallback-dtm", "coarse terrain GeoTIFF", false},
        {"--tx", "transmitter lat,lon,height_m", true},
        {"--measurements", "measurement CSV", true}}},
      {"sweep-ret-limit",
       {{"--dtm", "terrain GeoTIFF", true},
        {"--dsm", "surface GeoTIFF", true},
        {"--fallback-dtm", "coarse terrain GeoTIFF", false},
        {"--tx", "transmitter lat,lon,height_m", true},
        {"--measurements", "measurement CSV", true},
        {"--limits", "comma-separated limits in dB (default 0,2,...,40)", false}}},
  };
  return specs;
}

const std::map<std::string, std::string> kCommandHelp = {
    {"predict", "path loss for one transmitter-receiver link"},
    {"coverage", "path loss grid over a bounding box"},
    {"profile", "terrain and clutter profile between two points"},
    {"ret-curve", "foliage loss against canopy depth"},
    {"validate", "compare predictions with drive-test measurements"},
    {"sweep-ret-limit", "validation RMSE for a series of foliage loss limits"},
};

// Flags whose values name input files recorded in the manifest.
const std::map<std::string, std::string> kInputFlags = {
    {"--dtm", "dtm"}, {"--dsm", "dsm"}, {"--fallback-dtm", "fallback_dtm"}, {"--measurements", "measurements"}};

std::string fmt(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, what));
  if (out.empty()) fail(Errc::UsageError, what + " is empty");
  return out;
}

struct Endpoint {
  LatLon position;
  std::optional<double> height_m;
};

Endpoint parse_endpoint(const std::string& text, const std::string& what) {
  const auto v = parse_list(text, what);
  if (v.size() != 2 && v.size() != 3) fail(Errc::UsageError, what + " must be lat,lon[,height_m]");
  Endpoint e{{v[0], v[1]}, std::nullopt};
  if (v.size() == 3) e.height_m = v[2];
  return e;
}

class Run {
 public:
  Run(const Options& opt, Settings settings, std::optional<fs::path> config_file, std::ostream& out)
      : opt_(opt), settings_(std::move(settings)), config_file_(std::move(config_file)), out_(out),
        rc_(to_run_config(settings_)) {}

  void execute() {
    fs::create_directories(opt_.out_dir);
    const std::string& c = opt_.command;
    if (c == "predict") predict();
    else if (c == "coverage") coverage();
    else if (c == "profile") profile();
    else if (c == "ret-curve") ret_curve_cmd();
    else if (c == "validate") validate();
    else if (c == "sweep-ret-limit") sweep();
    write_manifest();
  }

 private:
  std::optional<std::string> arg(const char* flag) const {
    auto it = opt_.args.find(flag);
    return it == opt_.args.end() ? std::nullopt : std::optional<std::string>(it->second);
  }

  double num(const char* flag, double fallback) const {
    const auto v = arg(flag);
    return v ? parse_double(*v, flag) : fallback;
  }

  ElevationStack stack() const {
    auto dtm = std::make_shared<const ElevationGrid>(load_grid(*arg("--dtm"), GridKind::Terrain));
    auto dsm = std::make_shared<const ElevationGrid>(load_grid(*arg("--dsm"), GridKind::Surface));
    std::shared_ptr<const ElevationGrid> fallback;
    if (const auto f = arg("--fallback-dtm")) {
      fallback = std::make_shared<const ElevationGrid>(load_grid(*f, GridKind::Terrain));
    }
    return ElevationStack(dtm, dsm, fallback, rc_.tree_growth_offset_m());
  }

  Transmitter transmitter(bool need_height = true) const {
    const Endpoint e = parse_endpoint(*arg("--tx"), "--tx");
    if (need_height && !e.height_m) fail(Errc::UsageError, "--tx needs lat,lon,height_m");
    Transmitter tx;
    tx.position = e.position;
    tx.height_m = e.height_m.value_or(0.0);
    tx.frequency_mhz = num("--freq", 0.0);
    tx.polarization = rc_.polarization;
    return tx;
  }

  fs::path output(const std::string& role, const std::string& name) {
    const fs::path p = fs::path(opt_.out_dir) / name;
    outputs_[role] = p;
    return p;
  }

  void write_text(const std::string& role, const std::string& name, const std::string& text) {
    std::ofstream f(output(role, name), std::ios::binary);
    if (!f) fail(Errc::IoError, "cannot write " + name);
    f << text;
  }

  void predict() {
    const Transmitter tx = transmitter();
    const Endpoint rx = parse_endpoint(*arg("--rx"), "--rx");
    const LinkParams link{tx.frequency_mhz, tx.height_m, rx.height_m.value_or(rc_.safe.rx_height_m), tx.position,
                          rx.position, tx.polarization};
    const PredictionResult r = safe::predict(stack(), link, rc_.safe);
    Json j;
    j["mode"] = std::string(to_string(rc_.safe.mode));
    j["pl_safe_db"] = r.pl_safe_db;
    j["pl_p1812_no_clutter_db"] = r.pl_p1812_no_clutter_db;
    j["pl_p1812_with_clutter_db"] = opt_json(r.pl_p1812_with_clutter_db);
    j["ret_loss_raw_db"] = r.ret_loss_raw_db;
    j["ret_loss_clamped_db"] = r.ret_loss_clamped_db;
    j["ret_limit_db"] = rc_.safe.ret_limit.limit_db;
    j["foliage_depth_m"] = r.foliage_depth_m;
    j["theta_deg"] = opt_json(r.theta_deg);
    j["path_length_km"] = r.path_length_km;
    j["n_profile_points"] = r.n_profile_points;
    j["fallback_used"] = r.fallback_used;
    const std::string text = j.dump(2) + "\n";
    write_text("prediction", "prediction.json", text);
    out_ << text;
  }

  void coverage() {
    const auto box = parse_list(*arg("--region"), "--region");
    if (box.size() != 4) fail(Errc::UsageError, "--region must be south,west,north,east");
    const CoverageGrid grid = predict_grid(stack(), transmitter(), {box[0], box[1], box[2], box[3]},
                                           parse_double(*arg("--resolution"), "--resolution"), rc_.safe, rc_.threads);
    std::ostringstream csv;
    csv << "lat,lon,pl_safe_dB,foliage_depth_m,status\n";
    for (const auto& cell : grid.cells) {
      csv << fmt(cell.center.lat) << ',' << fmt(cell.center.lon) << ',';
      if (cell.result) csv << fmt(cell.result->pl_safe_db) << ',' << fmt(cell.result->foliage_depth_m);
      else csv << ',';
      csv << ',' << to_string(cell.status) << '\n';
    }
    write_text("coverage", "coverage.csv", csv.str());
    out_ << "wrote " << (fs::path(opt_.out_dir) / "coverage.csv").string() << " (" << grid.rows << " x " << grid.cols
         << " cells)\n";
    if (const auto name = arg("--raster")) {
      constexpr double kNoData = -9999.0;
      RasterData r;
      r.width = grid.cols;
      r.height = grid.rows;
      r.transform = GeoTransform{box[1], grid.lon_step_deg, 0.0, box[2], 0.0, -grid.lat_step_deg};
      r.epsg = 4326;
      r.nodata = kNoData;
      r.values.reserve(grid.cells.size());
      for (const auto& cell : grid.cells) r.values.push_back(cell.result ? cell.result->pl_safe_db : kNoData);
      write_geotiff(output("raster", fs::path(*name).filename().string()), r);
    }
  }

  void profile() {
    const Endpoint tx = parse_endpoint(*arg("--tx"), "--tx");
    const Endpoint rx = parse_endpoint(*arg("--rx"), "--rx");
    const RawProfile raw = extract_profile(stack(), tx.position, rx.position, rc_.safe.profile_spacing_m);
    const PathProfile cls = classify_clutter(raw, rc_.safe.clutter_class, rc_.safe.detection_threshold_m);
    std::ostringstream csv;
    csv << "index,distance_km,lat,lon,terrain_m,raw_clutter_m,clutter_m,high_resolution\n";
    for (std::size_t i = 0; i < raw.size(); ++i) {
      csv << i << ',' << fmt(raw.distances_km[i]) << ',' << fmt(raw.points[i].lat) << ',' << fmt(raw.points[i].lon)
          << ',' << fmt(raw.terrain_m[i]) << ',' << fmt(raw.clutter_m[i]) << ',' << fmt(cls.clutter_m[i]) << ','
          << (raw.high_resolution[i] ? 1 : 0) << '\n';
    }
    write_text("profile", "profile.csv", csv.str());
    out_ << csv.str();
  }

  void ret_curve_cmd() {
    const auto curve = safe::ret_curve(rc_.safe.ret_params, num("--theta", 30.0), num("--max-depth", 100.0),
                                       num("--step", 1.0));
    std::ostringstream csv;
    csv << "depth_m,loss_dB\n";
    for (const auto& [d, l] : curve) csv << fmt(d) << ',' << fmt(l) << '\n';
    write_text("ret_curve", "ret_curve.csv", csv.str());
    out_ << csv.str();
  }

  void validate() {
    const auto records = read_measurements_csv(*arg("--measurements"));
    const ValidationReport rep = validate_measurements(records, stack(), transmitter(), rc_.safe, rc_.threads);
    Json j;
    j["mode"] = std::string(to_string(rc_.safe.mode));
    j["ret_limit_db"] = rc_.safe.ret_limit.limit_db;
    j["rmse"] = rep.rmse_db;
    j["mean_error"] = rep.mean_error_db;
    j["bin_count_total"] = rep.bin_count_total;
    j["bin_count_valid"] = rep.bin_count_valid;
    j["record_count"] = rep.record_count;
    j["records_skipped"] = rep.records_skipped;
    Json hist = Json::array();
    for (const auto& h : rep.histogram) hist.push_back({{"error_bin_center_db", h.center_db}, {"frequency", h.count}});
    j["histogram"] = hist;
    const std::string text = j.dump(2) + "\n";
    write_text("report", "report.json", text);

    std::ostringstream bins;
    bins << "geohash,count,median_measured,median_predicted,valid\n";
    for (const auto& b : rep.bins) {
      bins << b.geohash << ',' << b.count << ',' << fmt(b.median_measured_db) << ',' << fmt(b.median_predicted_db)
           << ',' << (b.valid ? "true" : "false") << '\n';
    }
    write_text("bins", "bins.csv", bins.str());
    std::ostringstream hcsv;
    hcsv << "error_bin_center_db,frequency\n";
    for (const auto& h : rep.histogram) hcsv << fmt(h.center_db) << ',' << h.count << '\n';
    write_text("histogram", "histogram.csv", hcsv.str());
    out_ << text;
  }

  void sweep() {
    std::vector<double> limits;
    if (const auto l = arg("--limits")) {
      limits = parse_list(*l, "--limits");
    } else {
      for (int v = 0; v <= 40; v += 2) limits.push_back(v);
    }
    const auto records = read_measurements_csv(*arg("--measurements"));
    const auto points = sweep_ret_limit(records, stack(), transmitter(), rc_.safe, limits, rc_.threads);
    std::ostringstream csv;
    csv << "limit_db,rmse_db\n";
    for (const auto& p : points) csv << fmt(p.limit_db) << ',' << fmt(p.rmse_db) << '\n';
    write_text("sweep", "sweep.csv", csv.str());
    out_ << csv.str();
  }

  void write_manifest() {
    Manifest m;
    m.tool_version = kToolVersion;
    m.command = opt_.command;
    for (const auto& [flag, value] : opt_.args) {
      m.arguments.push_back(flag);
      m.arguments.push_back(value);
      if (auto it = kInputFlags.find(flag); it != kInputFlags.end()) m.inputs[it->second] = {value, sha256_file(value)};
    }
    if (rc_.ret_table) m.inputs["ret_table"] = {rc_.ret_table->string(), sha256_file(*rc_.ret_table)};
    if (config_file_) m.inputs["config"] = {config_file_->string(), sha256_file(*config_file_)};
    m.settings = settings_.values();
    for (const auto& [role, p] : outputs_) m.outputs[role] = {p.string(), sha256_file(p)};
    std::ofstream f(fs::path(opt_.out_dir) / "manifest.json", std::ios::binary);
    if (!f) fail(Errc::IoError, "cannot write manifest");
    f << m.to_json();
  }

  const Options& opt_;
  Settings settings_;
  std::optional<fs::path> config_file_;
  std::ostream& out_;
  RunConfig rc_;
  std::map<std::string, fs::path> outputs_;
};

void report_error(std::ostream& err, Errc code, const std::string& message) {
  Json j;
  j["error"] = {{"code", std::string(to_string(code))}, {"exit_code", exit_code_for(code)}, {"message", message}};
  err << j.dump() << '\n';
}

// Parses argv into Options. Returns std::nullopt when help was printed.
std::optional<Options> parse(const std::vector<std::string>& argv, std::ostream& out,
                             std::optional<std::string>& from_manifest) {
  CLI::App app{"Foliage-aware path loss prediction and validation", "safe"};
  app.set_help_all_flag("--help-all", "print help for every subcommand");
  Options opt;
  std::string manifest_path;
  app.add_option("--from-manifest", manifest_path, "rerun the command recorded in a manifest.json");
  app.add_option("--out-dir", opt.out_dir, "output directory (default safe_output)");
  app.require_subcommand(0, 1);

  std::map<std::string, std::map<std::string, std::string>> raw_settings, raw_args;
  std::map<std::string, std::string> config_values, preset_values;
  for (const auto& [name, specs] : command_args()) {
    CLI::App* sub = app.add_subcommand(name, kCommandHelp.at(name));
    sub->add_option("--config", config_values[name], "settings file (default $SAFE_CONFIG)");
    sub->add_option("--preset", preset_values[name], "named preset: semi-rural | heavily-forested | [preset X] sections");
    sub->add_option("--out-dir", opt.out_dir, "output directory (default safe_output)");
    for (const auto& s : kSettingFlags) sub->add_option(s.flag, raw_settings[name][s.key], s.help);
    for (const auto& a : specs) {
      auto* o = sub->add_option(a.flag, raw_args[name][a.flag], a.help);
      if (a.required) o->required();
    }
  }

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    fail(Errc::UsageError, e.what());
  }

  if (!manifest_path.empty()) {
    from_manifest = manifest_path;
    return opt;
  }
  const auto subs = app.get_subcommands();
  if (subs.empty()) fail(Errc::UsageError, "a subcommand is required: predict, coverage, profile, ret-curve, validate, sweep-ret-limit");
  CLI::App* sub = subs.front();
  opt.command = sub->get_name();
  for (const auto& s : kSettingFlags) {
    if (sub->count(s.flag) > 0) opt.setting_flags[s.key] = raw_settings[opt.command][s.key];
  }
  for (const auto& a : command_args().at(opt.command)) {
    if (sub->count(a.flag) > 0) opt.args[a.flag] = raw_args[opt.command][a.flag];
  }
  if (sub->count("--config") > 0) opt.config = config_values[opt.command];
  if (sub->count("--preset") > 0) opt.preset = preset_values[opt.command];
  return opt;
}

}  // namespace

int exit_code_for(Errc code) noexcept {
  return code == Errc::UsageError ? kUsageExitCode : 10 + static_cast<int>(code);
}

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  try {
    std::optional<std::string> from_manifest;
    auto opt = parse(argv, out, from_manifest);
    if (!opt) return 0;
    if (from_manifest) {
      const Manifest m = Manifest::load(*from_manifest);
      m.verify_inputs();
      std::vector<std::string> replay{m.command};
      replay.insert(replay.end(), m.arguments.begin(), m.arguments.end());
      std::optional<std::string> unused;
      auto ropt = parse(replay, out, unused);
      ropt->out_dir = opt->out_dir;
      Settings s = Settings::defaults();
      for (const auto& [k, v] : m.settings) s.set(k, v);
      Run(*ropt, s, std::nullopt, out).execute();
      return 0;
    }
    const ResolvedSettings resolved = resolve_settings(
        opt->config ? std::optional<fs::path>(*opt->config) : std::nullopt, opt->preset, opt->setting_flags);
    Run(*opt, resolved.settings, resolved.config_file, out).execute();
    return 0;
  } catch (const Error& e) {
    report_error(err, e.code(), e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    report_error(err, Errc::IoError, e.what());
    return exit_code_for(Errc::IoError);
  } catch (const std::exception& e) {
    Json j;
    j["error"] = {{"code", "Internal"}, {"exit_code", 1}, {"message", e.what()}};
    err << j.dump() << '\n';
    return 1;
  }
}

}  // namespace safe::cli
