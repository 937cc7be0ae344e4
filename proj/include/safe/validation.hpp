#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "safe/elevation.hpp"
#include "safe/predictor.hpp"

namespace safe {

struct MeasurementRecord {
  double lat = 0.0;
  double lon = 0.0;
  double pl_measured_db = 0.0;
  double frequency_mhz = 0.0;
  std::string tx_id;
  double tx_eirp_dbm = 0.0;
  double noise_floor_dbm = 0.0;
  double rx_height_m = 0.0;

  double max_path_loss_db() const noexcept { return tx_eirp_dbm - noise_floor_dbm; }
  void validate() const;  // InvalidParameter, CoordinateOutOfRange
};

// Header required: lat, lon, pl_db, freq_mhz, tx_id, eirp_dbm,
// noise_floor_dbm, rx_height_m (any column order). ParseError, FileMissing.
std::vector<MeasurementRecord> parse_measurements_csv(std::string_view text);
std::vector<MeasurementRecord> read_measurements_csv(const std::filesystem::path& path);
std::string format_measurements_csv(std::span<const MeasurementRecord> records);

struct MeasurementBin {
  std::string geohash;
  std::size_t count = 0;
  double median_measured_db = 0.0;
  double median_predicted_db = 0.0;
  double max_path_loss_db = 0.0;  // smallest eirp - noise among the bin's records
  bool valid = false;

  double error_db() const noexcept { return median_predicted_db - median_measured_db; }
};

inline constexpr double kDefaultValidityMarginDb = 6.0;
inline constexpr std::size_t kDefaultMinBinCount = 3;
inline constexpr double kDefaultHistogramWidthDb = 2.0;

// Even counts take the mean of the two middle values. EmptyInput.
double median(std::vector<double> values);

bool bin_validity(const MeasurementBin& bin, double max_path_loss_db, double margin_db = kDefaultValidityMarginDb,
                  std::size_t min_count = kDefaultMinBinCount);

using Predictor = std::function<double(const MeasurementRecord&)>;

// One bin per distinct geohash-8 cell, sorted by geohash. EmptyInput,
// MixedTransmitters.
std::vector<MeasurementBin> bin_measurements(std::span<const MeasurementRecord> records, const Predictor& predictor);
// Same with predictions already computed, predictions[i] for records[i].
std::vector<MeasurementBin> bin_measurements(std::span<const MeasurementRecord> records,
                                             std::span<const double> predictions);

// Statistics over the valid bins only (predicted - measured). NoValidBins.
double rmse(std::span<const MeasurementBin> bins);
double mean_error(std::span<const MeasurementBin> bins);

struct HistogramBar {
  double center_db = 0.0;
  std::size_t count = 0;
};

// Errors are assigned to the nearest multiple of the width. NoValidBins,
// InvalidParameter for a nonpositive width.
std::vector<HistogramBar> error_histogram(std::span<const MeasurementBin> bins,
                                          double bin_width_db = kDefaultHistogramWidthDb);

struct ValidationReport {
  double rmse_db = 0.0;
  double mean_error_db = 0.0;
  std::size_t bin_count_total = 0;
  std::size_t bin_count_valid = 0;
  std::size_t record_count = 0;
  std::size_t records_skipped = 0;  // outside the prediction domain or coverage
  std::vector<HistogramBar> histogram;
  std::vector<MeasurementBin> bins;
};

ValidationReport make_report(std::vector<MeasurementBin> bins, double bin_width_db = kDefaultHistogramWidthDb);

// Limit-independent link evaluations for every record, computed once with
// the transmitter and each record's position, frequency and rx height.
// Records outside the model domain or elevation coverage get std::nullopt.
struct RecordEvaluations {
  std::vector<std::optional<LinkEvaluation>> links;

  std::size_t skipped() const;
};

RecordEvaluations evaluate_records(std::span<const MeasurementRecord> records, const ElevationStack& stack,
                                   const Transmitter& tx, const SafeConfig& config, std::size_t threads = 0);

// Full pipeline for one mode and limit. NoValidBins when nothing survives.
ValidationReport validate_records(std::span<const MeasurementRecord> records, const RecordEvaluations& evals,
                                  PredictionMode mode, RetLimit limit,
                                  double bin_width_db = kDefaultHistogramWidthDb);
ValidationReport validate_measurements(std::span<const MeasurementRecord> records, const ElevationStack& stack,
                                       const Transmitter& tx, const SafeConfig& config, std::size_t threads = 0);

struct SweepPoint {
  double limit_db = 0.0;
  double rmse_db = 0.0;
};

// Re-runs binning and RMSE per limit over one shared set of evaluations.
// InvalidParameter for an empty or negative limit list.
std::vector<SweepPoint> sweep_ret_limit(std::span<const MeasurementRecord> records, const ElevationStack& stack,
                                        const Transmitter& tx, const SafeConfig& config,
                                        std::span<const double> limits_db, std::size_t threads = 0);
std::vector<SweepPoint> sweep_ret_limit(std::span<const MeasurementRecord> records, const RecordEvaluations& evals,
                                        std::span<const double> limits_db);

}  // namespace safe
