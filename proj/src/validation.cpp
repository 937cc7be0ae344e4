#include "safe/validation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "safe/error.hpp"
#include "safe/geohash.hpp"
#include "safe/kv_config.hpp"
#include "safe/parallel.hpp"

namespace safe {

namespace {

constexpr const char* kColumns[] = {"lat",    "lon",     "pl_db",           "freq_mhz",
                                    "tx_id",  "eirp_dbm", "noise_floor_dbm", "rx_height_m"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<const MeasurementBin*> valid_bins(std::span<const MeasurementBin> bins) {
  std::vector<const MeasurementBin*> out;
  for (const auto& b : bins) {
    if (b.valid) out.push_back(&b);
  }
  if (out.empty()) fail(Errc::NoValidBins, "no valid bins");
  return out;
}

}  // namespace

void MeasurementRecord::validate() const {
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
    fail(Errc::CoordinateOutOfRange, "measurement coordinate out of range");
  }
  if (!(pl_measured_db > 0.0)) fail(Errc::InvalidParameter, "measured path loss must be > 0");
  if (!(tx_eirp_dbm > noise_floor_dbm)) fail(Errc::InvalidParameter, "EIRP must exceed the noise floor");
  if (!std::isfinite(frequency_mhz) || !std::isfinite(rx_height_m)) {
    fail(Errc::InvalidParameter, "measurement frequency and rx height must be finite");
  }
}

std::vector<MeasurementRecord> parse_measurements_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<MeasurementRecord> out;
  std::vector<int> column_of(std::size(kColumns), -1);
  std::size_t header_size = 0;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (!have_header) {
      header_size = fields.size();
      for (std::size_t c = 0; c < std::size(kColumns); ++c) {
        const auto it = std::find(fields.begin(), fields.end(), kColumns[c]);
        if (it == fields.end()) fail(Errc::ParseError, std::string("measurement CSV lacks column '") + kColumns[c] + "'");
        column_of[c] = static_cast<int>(it - fields.begin());
      }
      have_header = true;
      continue;
    }
    if (fields.size() != header_size) {
      fail(Errc::ParseError, "line " + std::to_string(lineno) + ": expected " + std::to_string(header_size) + " fields");
    }
    auto num = [&](std::size_t c) { return parse_double(fields[static_cast<std::size_t>(column_of[c])], kColumns[c]); };
    MeasurementRecord r;
    r.lat = num(0);
    r.lon = num(1);
    r.pl_measured_db = num(2);
    r.frequency_mhz = num(3);
    r.tx_id = fields[static_cast<std::size_t>(column_of[4])];
    r.tx_eirp_dbm = num(5);
    r.noise_floor_dbm = num(6);
    r.rx_height_m = num(7);
    r.validate();
    out.push_back(std::move(r));
  }
  if (!have_header) fail(Errc::ParseError, "measurement CSV is empty");
  return out;
}

std::vector<MeasurementRecord> read_measurements_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::FileMissing, "no such file: " + path.string());
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_measurements_csv(ss.str());
}

std::string format_measurements_csv(std::span<const MeasurementRecord> records) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t c = 0; c < std::size(kColumns); ++c) out << (c ? "," : "") << kColumns[c];
  out << '\n';
  for (const auto& r : records) {
    out << r.lat << ',' << r.lon << ',' << r.pl_measured_db << ',' << r.frequency_mhz << ',' << r.tx_id << ','
        << r.tx_eirp_dbm << ',' << r.noise_floor_dbm << ',' << r.rx_height_m << '\n';
  }
  return out.str();
}

double median(std::vector<double> values) {
  if (values.empty()) fail(Errc::EmptyInput, "median of no values");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

bool bin_validity(const MeasurementBin& bin, double max_path_loss_db, double margin_db, std::size_t min_count) {
  return bin.count >= min_count && bin.median_measured_db <= max_path_loss_db - margin_db;
}

std::vector<MeasurementBin> bin_measurements(std::span<const MeasurementRecord> records, const Predictor& predictor) {
  std::vector<double> predictions;
  predictions.reserve(records.size());
  for (const auto& r : records) predictions.push_back(predictor(r));
  return bin_measurements(records, predictions);
}

std::vector<MeasurementBin> bin_measurements(std::span<const MeasurementRecord> records,
                                             std::span<const double> predictions) {
  if (records.empty()) fail(Errc::EmptyInput, "no measurement records");
  if (predictions.size() != records.size()) fail(Errc::InvalidParameter, "one prediction per record required");
  for (const auto& r : records) {
    if (r.tx_id != records.front().tx_id) fail(Errc::MixedTransmitters, "records reference more than one transmitter");
  }
  struct Accumulator {
    std::vector<double> measured;
    std::vector<double> predicted;
    double max_path_loss = 0.0;
  };
  std::map<std::string, Accumulator> cells;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto [it, inserted] = cells.try_emplace(geohash8(r.lat, r.lon));
    auto& acc = it->second;
    acc.max_path_loss = inserted ? r.max_path_loss_db() : std::min(acc.max_path_loss, r.max_path_loss_db());
    acc.measured.push_back(r.pl_measured_db);
    acc.predicted.push_back(predictions[i]);
  }
  std::vector<MeasurementBin> bins;
  bins.reserve(cells.size());
  for (auto& [hash, acc] : cells) {
    MeasurementBin b;
    b.geohash = hash;
    b.count = acc.measured.size();
    b.median_measured_db = median(std::move(acc.measured));
    b.median_predicted_db = median(std::move(acc.predicted));
    b.max_path_loss_db = acc.max_path_loss;
    b.valid = bin_validity(b, b.max_path_loss_db);
    bins.push_back(std::move(b));
  }
  return bins;
}

double rmse(std::span<const MeasurementBin> bins) {
  const auto valid = valid_bins(bins);
  double sum = 0.0;
  for (const auto* b : valid) sum += b->error_db() * b->error_db();
  return std::sqrt(sum / static_cast<double>(valid.size()));
}

double mean_error(std::span<const MeasurementBin> bins) {
  const auto valid = valid_bins(bins);
  double sum = 0.0;
  for (const auto* b : valid) sum += b->error_db();
  return sum / static_cast<double>(valid.size());
}

std::vector<HistogramBar> error_histogram(std::span<const MeasurementBin> bins, double bin_width_db) {
  if (!(bin_width_db > 0.0)) fail(Errc::InvalidParameter, "histogram width must be > 0");
  std::map<long long, std::size_t> counts;
  for (const auto* b : valid_bins(bins)) ++counts[std::llround(b->error_db() / bin_width_db)];
  std::vector<HistogramBar> out;
  out.reserve(counts.size());
  for (const auto& [k, n] : counts) out.push_back({static_cast<double>(k) * bin_width_db, n});
  return out;
}

ValidationReport make_report(std::vector<MeasurementBin> bins, double bin_width_db) {
  ValidationReport rep;
  rep.rmse_db = rmse(bins);
  rep.mean_error_db = mean_error(bins);
  rep.histogram = error_histogram(bins, bin_width_db);
  rep.bin_count_total = bins.size();
  rep.bin_count_valid = static_cast<std::size_t>(std::count_if(bins.begin(), bins.end(), [](const auto& b) { return b.valid; }));
  for (const auto& b : bins) rep.record_count += b.count;
  rep.bins = std::move(bins);
  return rep;
}

std::size_t RecordEvaluations::skipped() const {
  return static_cast<std::size_t>(std::count(links.begin(), links.end(), std::nullopt));
}

RecordEvaluations evaluate_records(std::span<const MeasurementRecord> records, const ElevationStack& stack,
                                   const Transmitter& tx, const SafeConfig& config, std::size_t threads) {
  config.validate();
  RecordEvaluations out;
  out.links.resize(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const auto& r = records[i];
    LinkParams link;
    link.frequency_mhz = r.frequency_mhz;
    link.tx_height_m = tx.height_m;
    link.rx_height_m = r.rx_height_m;
    link.tx = tx.position;
    link.rx = {r.lat, r.lon};
    link.polarization = tx.polarization;
    try {
      out.links[i] = evaluate_link(stack, link, config);
    } catch (const Error& e) {
      switch (e.code()) {
        case Errc::PathTooShort:
        case Errc::DistanceOutOfRange:
        case Errc::DegenerateLink:
        case Errc::NoCoverage: break;
        default: throw;
      }
    }
  });
  return out;
}

namespace {

// Records and predictions that survived evaluation.
std::pair<std::vector<MeasurementRecord>, std::vector<double>> usable(std::span<const MeasurementRecord> records,
                                                                       const RecordEvaluations& evals,
                                                                       PredictionMode mode, RetLimit limit) {
  if (evals.links.size() != records.size()) fail(Errc::InvalidParameter, "one evaluation per record required");
  std::pair<std::vector<MeasurementRecord>, std::vector<double>> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!evals.links[i]) continue;
    out.first.push_back(records[i]);
    out.second.push_back(combine(*evals.links[i], mode, limit).pl_safe_db);
  }
  if (out.first.empty()) fail(Errc::NoValidBins, "no record could be predicted");
  return out;
}

}  // namespace

ValidationReport validate_records(std::span<const MeasurementRecord> records, const RecordEvaluations& evals,
                                  PredictionMode mode, RetLimit limit, double bin_width_db) {
  auto [kept, predictions] = usable(records, evals, mode, limit);
  ValidationReport rep = make_report(bin_measurements(kept, predictions), bin_width_db);
  rep.records_skipped = evals.skipped();
  return rep;
}

ValidationReport validate_measurements(std::span<const MeasurementRecord> records, const ElevationStack& stack,
                                       const Transmitter& tx, const SafeConfig& config, std::size_t threads) {
  if (records.empty()) fail(Errc::EmptyInput, "no measurement records");
  const auto evals = evaluate_records(records, stack, tx, config, threads);
  return validate_records(records, evals, config.mode, config.ret_limit);
}

std::vector<SweepPoint> sweep_ret_limit(std::span<const MeasurementRecord> records, const ElevationStack& stack,
                                        const Transmitter& tx, const SafeConfig& config,
                                        std::span<const double> limits_db, std::size_t threads) {
  if (records.empty()) fail(Errc::EmptyInput, "no measurement records");
  if (limits_db.empty()) fail(Errc::InvalidParameter, "no RET limits to sweep");
  SafeConfig safe = config;
  safe.mode = PredictionMode::Safe;
  return sweep_ret_limit(records, evaluate_records(records, stack, tx, safe, threads), limits_db);
}

std::vector<SweepPoint> sweep_ret_limit(std::span<const MeasurementRecord> records, const RecordEvaluations& evals,
                                        std::span<const double> limits_db) {
  if (limits_db.empty()) fail(Errc::InvalidParameter, "no RET limits to sweep");
  std::vector<SweepPoint> out;
  out.reserve(limits_db.size());
  for (double limit : limits_db) {
    if (!(limit >= 0.0)) fail(Errc::InvalidParameter, "RET limits must be >= 0");
    auto [kept, predictions] = usable(records, evals, PredictionMode::Safe, RetLimit{limit});
    out.push_back({limit, rmse(bin_measurements(kept, predictions))});
  }
  return out;
}

}  // namespace safe
