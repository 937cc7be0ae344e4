#include <functional>
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "safe/error.hpp"
#include "safe/geohash.hpp"
#include "safe/validation.hpp"
#include "synthetic.hpp"

using namespace safe;

namespace {

MeasurementRecord rec(double lat, double lon, double pl, double eirp = 60.0, double noise = -110.0,
                      std::string tx = "tx1") {
  return MeasurementRecord{lat, lon, pl, 2669.0, std::move(tx), eirp, noise, 2.5};
}

MeasurementBin bin(double measured, double predicted, bool valid = true, std::size_t count = 3) {
  MeasurementBin b;
  b.geohash = "u4pruydq";
  b.count = count;
  b.median_measured_db = measured;
  b.median_predicted_db = predicted;
  b.max_path_loss_db = 170.0;
  b.valid = valid;
  return b;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

// Brute-force oracle written without the library's helpers.
double oracle_rmse(const std::vector<MeasurementBin>& bins) {
  long double sum = 0.0L;
  int n = 0;
  for (const auto& b : bins) {
    if (!b.valid) continue;
    const long double e = static_cast<long double>(b.median_measured_db) - b.median_predicted_db;
    sum += e * e;
    ++n;
  }
  return static_cast<double>(std::sqrt(sum / n));
}

}  // namespace

TEST_CASE("median conventions") {
  CHECK(median({100, 110, 120}) == 110.0);
  CHECK(median({130, 100, 120, 110}) == 115.0);
  CHECK(median({7}) == 7.0);
  CHECK(code_of([] { median({}); }) == Errc::EmptyInput);
}

TEST_CASE("binning groups records by geohash-8 cell") {
  const std::vector<MeasurementRecord> rs = {rec(45.30001, -76.10001, 100), rec(45.30002, -76.10002, 110),
                                             rec(45.30003, -76.10001, 120)};
  REQUIRE(geohash8(rs[0].lat, rs[0].lon) == geohash8(rs[2].lat, rs[2].lon));
  const auto bins = bin_measurements(rs, [](const MeasurementRecord& r) { return r.pl_measured_db + 1.0; });
  REQUIRE(bins.size() == 1);
  CHECK(bins[0].count == 3);
  CHECK(bins[0].median_measured_db == 110.0);
  CHECK(bins[0].median_predicted_db == 111.0);
  CHECK(bins[0].geohash.size() == 8);
  CHECK(bins[0].valid);

  std::vector<MeasurementRecord> four = rs;
  four.push_back(rec(45.30002, -76.10003, 130));
  CHECK(bin_measurements(four, [](const MeasurementRecord&) { return 0.0; })[0].median_measured_db == 115.0);

  std::vector<MeasurementRecord> two_cells = rs;
  two_cells.push_back(rec(45.31, -76.05, 90));
  const auto b2 = bin_measurements(two_cells, [](const MeasurementRecord&) { return 0.0; });
  CHECK(b2.size() == 2);
  std::size_t total = 0;
  for (const auto& b : b2) total += b.count;
  CHECK(total == two_cells.size());
}

TEST_CASE("binning partitions random records") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> dlat(45.30, 45.302), dlon(-76.102, -76.10), pl(90, 150);
  std::vector<MeasurementRecord> rs;
  for (int i = 0; i < 500; ++i) rs.push_back(rec(dlat(rng), dlon(rng), pl(rng)));
  const auto bins = bin_measurements(rs, [](const MeasurementRecord& r) { return r.pl_measured_db; });
  std::size_t total = 0;
  for (const auto& b : bins) total += b.count;
  CHECK(total == rs.size());
  for (std::size_t i = 1; i < bins.size(); ++i) CHECK(bins[i - 1].geohash < bins[i].geohash);
}

TEST_CASE("binning errors") {
  CHECK(code_of([] { bin_measurements({}, [](const MeasurementRecord&) { return 0.0; }); }) == Errc::EmptyInput);
  const std::vector<MeasurementRecord> mixed = {rec(45.3, -76.1, 100), rec(45.3, -76.1, 100, 60, -110, "tx2")};
  CHECK(code_of([&] { bin_measurements(mixed, [](const MeasurementRecord&) { return 0.0; }); }) ==
        Errc::MixedTransmitters);
}

TEST_CASE("validity rule") {
  CHECK_FALSE(bin_validity(bin(100, 100, true, 2), 170.0));
  CHECK(bin_validity(bin(160, 0), 170.0));
  CHECK(bin_validity(bin(164, 0), 170.0));
  CHECK_FALSE(bin_validity(bin(166, 0), 170.0));
  CHECK_FALSE(bin_validity(bin(164.0000001, 0), 170.0));
  CHECK(bin_validity(bin(166, 0), 170.0, 4.0));
  CHECK(bin_validity(bin(100, 0, true, 1), 170.0, 6.0, 1));
}

TEST_CASE("the tightest max path loss in a bin governs validity") {
  const std::vector<MeasurementRecord> rs = {rec(45.30001, -76.10001, 150, 60, -110), rec(45.30002, -76.10002, 150, 50, -100),
                                             rec(45.30003, -76.10001, 150, 60, -110)};
  const auto bins = bin_measurements(rs, [](const MeasurementRecord&) { return 0.0; });
  CHECK(bins[0].max_path_loss_db == 150.0);
  CHECK_FALSE(bins[0].valid);
}

TEST_CASE("rmse examples") {
  CHECK(rmse(std::vector{bin(100, 100), bin(120, 120)}) == 0.0);
  CHECK(rmse(std::vector{bin(100, 103), bin(100, 104)}) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(rmse(std::vector{bin(100, 95)}) == 5.0);
  CHECK(rmse(std::vector{bin(100, 95), bin(100, 200, false)}) == 5.0);
  CHECK(code_of([] { rmse(std::vector{bin(100, 95, false)}); }) == Errc::NoValidBins);
  CHECK(code_of([] { rmse(std::vector<MeasurementBin>{}); }) == Errc::NoValidBins);
}

TEST_CASE("rmse agrees with a brute-force recomputation and ignores order") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> v(80.0, 160.0);
  std::bernoulli_distribution valid(0.8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<MeasurementBin> bins;
    const int n = 1 + static_cast<int>(rng() % 200);
    for (int i = 0; i < n; ++i) bins.push_back(bin(v(rng), v(rng), valid(rng)));
    bins.push_back(bin(v(rng), v(rng), true));
    const double r = rmse(bins);
    CHECK(std::abs(r - oracle_rmse(bins)) <= 1e-9);
    std::shuffle(bins.begin(), bins.end(), rng);
    CHECK(std::abs(rmse(bins) - r) <= 1e-9);
  }
}

TEST_CASE("mean error sign: overprediction is positive") {
  CHECK(mean_error(std::vector{bin(100, 104), bin(100, 98)}) == 1.0);
}

TEST_CASE("histogram") {
  const auto zero = error_histogram(std::vector{bin(100, 100), bin(110, 110), bin(120, 120)});
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].center_db == 0.0);
  CHECK(zero[0].count == 3);
  const auto sym = error_histogram(std::vector{bin(100, 97), bin(100, 103)}, 2.0);
  REQUIRE(sym.size() == 2);
  CHECK(sym[0].center_db == -sym[1].center_db);
  CHECK(sym[0].count == sym[1].count);
  std::mt19937 rng(8);
  std::normal_distribution<double> err(0.0, 8.0);
  std::vector<MeasurementBin> bins;
  for (int i = 0; i < 300; ++i) bins.push_back(bin(120.0, 120.0 + err(rng), i % 7 != 0));
  std::size_t total = 0;
  for (const auto& h : error_histogram(bins)) total += h.count;
  CHECK(total == static_cast<std::size_t>(std::count_if(bins.begin(), bins.end(), [](auto& b) { return b.valid; })));
  CHECK(code_of([&] { error_histogram(bins, 0.0); }) == Errc::InvalidParameter);
}

TEST_CASE("report counts") {
  const ValidationReport rep = make_report({bin(100, 103), bin(100, 104), bin(170, 100, false, 1)});
  CHECK(rep.bin_count_total == 3);
  CHECK(rep.bin_count_valid == 2);
  CHECK(rep.rmse_db >= 0.0);
  std::size_t total = 0;
  for (const auto& h : rep.histogram) total += h.count;
  CHECK(total == rep.bin_count_valid);
}

TEST_CASE("measurement CSV round trip and schema") {
  const std::vector<MeasurementRecord> rs = {rec(45.3, -76.1, 120.5), rec(45.31, -76.05, 99.25)};
  const auto back = parse_measurements_csv(format_measurements_csv(rs));
  REQUIRE(back.size() == 2);
  CHECK(back[1].lat == 45.31);
  CHECK(back[1].pl_measured_db == 99.25);
  CHECK(back[0].tx_id == "tx1");
  const auto reordered = parse_measurements_csv(
      "tx_id,lon,lat,pl_db,freq_mhz,eirp_dbm,noise_floor_dbm,rx_height_m\nA,-76.1,45.3,110,725,50,-100,2.5\n");
  CHECK(reordered[0].frequency_mhz == 725.0);
  CHECK(code_of([] { parse_measurements_csv("lat,lon\n1,2\n"); }) == Errc::ParseError);
  CHECK(code_of([] {
          parse_measurements_csv("lat,lon,pl_db,freq_mhz,tx_id,eirp_dbm,noise_floor_dbm,rx_height_m\n45,-76,-1,725,A,50,-100,2.5\n");
        }) == Errc::InvalidParameter);
  CHECK(code_of([] {
          parse_measurements_csv("lat,lon,pl_db,freq_mhz,tx_id,eirp_dbm,noise_floor_dbm,rx_height_m\n45,-76,100,725,A,-120,-100,2.5\n");
        }) == Errc::InvalidParameter);
  CHECK(code_of([] { read_measurements_csv("/nonexistent/m.csv"); }) == Errc::FileMissing);
}

TEST_CASE("sweep endpoints reproduce the pure modes") {
  const synth::ForestScene s = synth::make_forest_scene(3, 2400.0);
  const auto drive = synth::make_drive(s, SafeConfig{}, 25, 3, 8.0, 21, 400.0, 1000.0);
  SafeConfig cfg;
  const auto evals = evaluate_records(drive.records, s.stack, s.tx, cfg, 2);
  double max_raw = 0.0;
  for (const auto& e : evals.links) {
    REQUIRE(e);
    max_raw = std::max(max_raw, e->ret_loss_raw_db);
  }
  CHECK(max_raw > 0.0);
  const std::vector<double> limits = {0.0, 10.0, 20.0, max_raw, max_raw + 50.0};
  const auto sweep = sweep_ret_limit(drive.records, s.stack, s.tx, cfg, limits, 2);
  REQUIRE(sweep.size() == limits.size());

  SafeConfig bare = cfg;
  bare.mode = PredictionMode::P1812NoClutter;
  const double rmse_bare = validate_measurements(drive.records, s.stack, s.tx, bare, 1).rmse_db;
  CHECK(std::abs(sweep[0].rmse_db - rmse_bare) <= 1e-9);

  SafeConfig unclamped = cfg;
  unclamped.ret_limit = RetLimit{1e12};
  const double rmse_free = validate_measurements(drive.records, s.stack, s.tx, unclamped, 1).rmse_db;
  CHECK(std::abs(sweep[3].rmse_db - rmse_free) <= 1e-9);
  CHECK(std::abs(sweep[4].rmse_db - rmse_free) <= 1e-9);

  const double rmse_20 = validate_measurements(drive.records, s.stack, s.tx, cfg, 3).rmse_db;
  CHECK(sweep[2].rmse_db == rmse_20);
  CHECK(code_of([&] { sweep_ret_limit(drive.records, evals, std::vector<double>{}); }) == Errc::InvalidParameter);
}

TEST_CASE("validation is independent of thread count") {
  const synth::ForestScene s = synth::make_forest_scene(5, 2400.0);
  const auto drive = synth::make_drive(s, SafeConfig{}, 20, 3, 8.0, 2, 400.0, 1000.0);
  const ValidationReport a = validate_measurements(drive.records, s.stack, s.tx, SafeConfig{}, 1);
  const ValidationReport b = validate_measurements(drive.records, s.stack, s.tx, SafeConfig{}, 4);
  CHECK(a.rmse_db == b.rmse_db);
  CHECK(a.mean_error_db == b.mean_error_db);
  REQUIRE(a.bins.size() == b.bins.size());
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    CHECK(a.bins[i].geohash == b.bins[i].geohash);
    CHECK(a.bins[i].median_predicted_db == b.bins[i].median_predicted_db);
  }
}

TEST_CASE("records outside coverage are skipped") {
  const synth::ForestScene s = synth::make_forest_scene(5, 2400.0);
  auto drive = synth::make_drive(s, SafeConfig{}, 5, 3, 8.0, 2, 400.0, 1000.0);
  const LatLon far = s.at(5000.0, 0.0);
  for (int i = 0; i < 3; ++i) drive.records.push_back(rec(far.lat, far.lon + i * 1e-6, 120.0, 60.0, -120.0, "synthetic-tx"));
  const ValidationReport rep = validate_measurements(drive.records, s.stack, s.tx, SafeConfig{}, 2);
  CHECK(rep.records_skipped == 3);
  CHECK(rep.record_count == 15);
}
