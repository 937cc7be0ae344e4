// Python bindings for the core prediction, foliage and validation operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "safe/error.hpp"
#include "safe/geohash.hpp"
#include "safe/p1812.hpp"
#include "safe/predictor.hpp"
#include "safe/profile.hpp"
#include "safe/raster.hpp"
#include "safe/ret.hpp"
#include "safe/validation.hpp"

namespace py = pybind11;
using namespace safe;

namespace {

py::dict to_dict(const PredictionResult& r) {
  py::dict d;
  d["pl_safe_db"] = r.pl_safe_db;
  d["pl_p1812_no_clutter_db"] = r.pl_p1812_no_clutter_db;
  d["pl_p1812_with_clutter_db"] = r.pl_p1812_with_clutter_db;
  d["ret_loss_raw_db"] = r.ret_loss_raw_db;
  d["ret_loss_clamped_db"] = r.ret_loss_clamped_db;
  d["foliage_depth_m"] = r.foliage_depth_m;
  d["theta_deg"] = r.theta_deg;
  d["path_length_km"] = r.path_length_km;
  d["n_profile_points"] = r.n_profile_points;
  d["fallback_used"] = r.fallback_used;
  return d;
}

SafeConfig make_config(const std::string& mode, double ret_limit_db, double rx_height_m) {
  SafeConfig cfg;
  cfg.mode = parse_prediction_mode(mode);
  cfg.ret_limit = RetLimit{ret_limit_db};
  cfg.rx_height_m = rx_height_m;
  return cfg;
}

Polarization parse_pol(const std::string& s) {
  if (s == "vertical") return Polarization::Vertical;
  if (s == "horizontal") return Polarization::Horizontal;
  fail(Errc::InvalidParameter, "polarization must be vertical or horizontal");
}

Transmitter make_tx(std::pair<double, double> pos, double height_m, double freq_mhz, const std::string& pol) {
  return Transmitter{{pos.first, pos.second}, height_m, freq_mhz, parse_pol(pol)};
}

MeasurementBin make_bin(double measured, double predicted, std::size_t count, bool valid) {
  MeasurementBin b;
  b.count = count;
  b.median_measured_db = measured;
  b.median_predicted_db = predicted;
  b.valid = valid;
  return b;
}

py::dict report_dict(const ValidationReport& rep) {
  py::dict d;
  d["rmse"] = rep.rmse_db;
  d["mean_error"] = rep.mean_error_db;
  d["bin_count_total"] = rep.bin_count_total;
  d["bin_count_valid"] = rep.bin_count_valid;
  d["record_count"] = rep.record_count;
  d["records_skipped"] = rep.records_skipped;
  py::list hist;
  for (const auto& h : rep.histogram) hist.append(py::make_tuple(h.center_db, h.count));
  d["histogram"] = hist;
  py::list bins;
  for (const auto& b : rep.bins) {
    py::dict bd;
    bd["geohash"] = b.geohash;
    bd["count"] = b.count;
    bd["median_measured"] = b.median_measured_db;
    bd["median_predicted"] = b.median_predicted_db;
    bd["valid"] = b.valid;
    bins.append(bd);
  }
  d["bins"] = bins;
  return d;
}

}  // namespace

PYBIND11_MODULE(pysafe, m) {
  m.doc() = "Foliage-aware path loss prediction over terrain and surface models";

  static py::exception<Error> safe_error(m, "SafeError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(safe_error.ptr())(py::str(e.what()));
      inst.attr("code") = py::str(std::string(to_string(e.code())));
      PyErr_SetObject(safe_error.ptr(), inst.ptr());
    }
  });

  py::class_<ElevationStack>(m, "ElevationStack")
      .def(py::init([](const std::filesystem::path& dtm, const std::filesystem::path& dsm,
                       std::optional<std::filesystem::path> fallback, double tree_growth_offset_m) {
             auto t = std::make_shared<const ElevationGrid>(load_grid(dtm, GridKind::Terrain));
             auto s = std::make_shared<const ElevationGrid>(load_grid(dsm, GridKind::Surface));
             std::shared_ptr<const ElevationGrid> f;
             if (fallback) f = std::make_shared<const ElevationGrid>(load_grid(*fallback, GridKind::Terrain));
             return ElevationStack(t, s, f, tree_growth_offset_m);
           }),
           py::arg("dtm"), py::arg("dsm"), py::arg("fallback_dtm") = py::none(), py::arg("tree_growth_offset_m") = 0.0)
      .def("terrain_height_at", [](const ElevationStack& s, double lat, double lon) { return s.terrain_height_at({lat, lon}); })
      .def("clutter_height_at", [](const ElevationStack& s, double lat, double lon) { return s.clutter_height_at({lat, lon}); })
      .def("apply_tree_growth", &ElevationStack::apply_tree_growth, py::arg("rate_m_per_year"), py::arg("years"))
      .def_property_readonly("tree_growth_offset", &ElevationStack::tree_growth_offset);

  m.def(
      "write_geotiff",
      [](const std::filesystem::path& path, const std::vector<std::vector<double>>& rows,
         std::array<double, 6> transform, int epsg, std::optional<double> nodata) {
        RasterData r;
        r.height = rows.size();
        r.width = rows.empty() ? 0 : rows.front().size();
        for (const auto& row : rows) {
          if (row.size() != r.width) fail(Errc::InvalidParameter, "ragged raster rows");
          r.values.insert(r.values.end(), row.begin(), row.end());
        }
        r.transform = GeoTransform{transform[0], transform[1], transform[2], transform[3], transform[4], transform[5]};
        r.epsg = epsg;
        r.nodata = nodata;
        write_geotiff(path, r);
      },
      py::arg("path"), py::arg("rows"), py::arg("transform"), py::arg("epsg"), py::arg("nodata") = py::none(),
      "Float32 GeoTIFF from row-major heights and a GDAL-ordered transform.");

  m.def(
      "predict",
      [](const ElevationStack& stack, std::pair<double, double> tx, double tx_height_m, std::pair<double, double> rx,
         double rx_height_m, double frequency_mhz, const std::string& mode, double ret_limit_db,
         const std::string& polarization) {
        const LinkParams link{frequency_mhz, tx_height_m, rx_height_m, {tx.first, tx.second}, {rx.first, rx.second},
                              parse_pol(polarization)};
        return to_dict(predict(stack, link, make_config(mode, ret_limit_db, rx_height_m)));
      },
      py::arg("stack"), py::arg("tx"), py::arg("tx_height_m"), py::arg("rx"), py::arg("rx_height_m") = 2.5,
      py::arg("frequency_mhz") = 3500.0, py::arg("mode") = "safe", py::arg("ret_limit_db") = 20.0,
      py::arg("polarization") = "vertical");

  m.def(
      "coverage",
      [](const ElevationStack& stack, std::pair<double, double> tx, double tx_height_m, double frequency_mhz,
         std::array<double, 4> region, double resolution_m, const std::string& mode, double ret_limit_db,
         double rx_height_m, std::size_t threads) {
        const CoverageGrid g =
            predict_grid(stack, make_tx(tx, tx_height_m, frequency_mhz, "vertical"),
                         {region[0], region[1], region[2], region[3]}, resolution_m,
                         make_config(mode, ret_limit_db, rx_height_m), threads);
        py::list cells;
        for (const auto& c : g.cells) {
          cells.append(py::make_tuple(c.center.lat, c.center.lon,
                                      c.result ? py::cast(c.result->pl_safe_db) : py::none(),
                                      std::string(to_string(c.status))));
        }
        py::dict d;
        d["rows"] = g.rows;
        d["cols"] = g.cols;
        d["cells"] = cells;
        return d;
      },
      py::arg("stack"), py::arg("tx"), py::arg("tx_height_m"), py::arg("frequency_mhz"), py::arg("region"),
      py::arg("resolution_m"), py::arg("mode") = "safe", py::arg("ret_limit_db") = 20.0, py::arg("rx_height_m") = 2.5,
      py::arg("threads") = 0, "region is (south, west, north, east); cells are (lat, lon, pl_safe_db, status).");

  m.def(
      "profile",
      [](const ElevationStack& stack, std::pair<double, double> tx, std::pair<double, double> rx, double spacing_m,
         const std::string& clutter_class, double detection_threshold_m) {
        const RawProfile raw = extract_profile(stack, {tx.first, tx.second}, {rx.first, rx.second}, spacing_m);
        const PathProfile cls = classify_clutter(raw, ClutterClass::standard(parse_clutter_category(clutter_class)),
                                                 detection_threshold_m);
        py::dict d;
        d["distances_km"] = raw.distances_km;
        d["terrain_m"] = raw.terrain_m;
        d["raw_clutter_m"] = raw.clutter_m;
        d["clutter_m"] = cls.clutter_m;
        d["spacing_m"] = raw.spacing_m;
        return d;
      },
      py::arg("stack"), py::arg("tx"), py::arg("rx"), py::arg("spacing_m") = kDefaultProfileSpacingM,
      py::arg("clutter_class") = "urban-trees-forest", py::arg("detection_threshold_m") = kDefaultDetectionThresholdM);

  m.def(
      "path_loss_p1812",
      [](const std::vector<double>& distances_km, const std::vector<double>& terrain_m,
         const std::vector<double>& clutter_m, double frequency_mhz, double tx_height_m, double rx_height_m,
         std::pair<double, double> tx, std::pair<double, double> rx, const std::string& polarization) {
        PathProfile p;
        p.distances_km = distances_km;
        p.terrain_m = terrain_m;
        p.clutter_m = clutter_m;
        p.spacing_m = distances_km.size() > 1 ? 1000.0 * distances_km.back() / double(distances_km.size() - 1) : 0.0;
        return path_loss_p1812(p, LinkParams{frequency_mhz, tx_height_m, rx_height_m, {tx.first, tx.second},
                                             {rx.first, rx.second}, parse_pol(polarization)});
      },
      py::arg("distances_km"), py::arg("terrain_m"), py::arg("clutter_m"), py::arg("frequency_mhz"),
      py::arg("tx_height_m"), py::arg("rx_height_m"), py::arg("tx"), py::arg("rx"), py::arg("polarization") = "vertical",
      "Basic transmission loss (dB) over an equally spaced profile.");

  m.def(
      "ret_loss",
      [](double depth_m, double theta_deg) {
        return ret_loss(RetParameters::american_plane_in_leaf(), depth_m, theta_deg);
      },
      py::arg("depth_m"), py::arg("theta_deg"), "Foliage loss (dB) with the default in-leaf 3.5 GHz set.");
  m.def(
      "ret_curve",
      [](double theta_deg, double max_depth_m, double step_m) {
        return ret_curve(RetParameters::american_plane_in_leaf(), theta_deg, max_depth_m, step_m);
      },
      py::arg("theta_deg") = 30.0, py::arg("max_depth_m") = 100.0, py::arg("step_m") = 1.0);
  m.def("clamp_ret", [](double raw, double limit) { return clamp_ret(raw, RetLimit{limit}); }, py::arg("raw_db"),
        py::arg("limit_db"));
  m.attr("SEMI_RURAL_LIMIT_DB") = RetLimit::kSemiRuralDb;
  m.attr("HEAVILY_FORESTED_LIMIT_DB") = RetLimit::kHeavilyForestedDb;

  m.def("geohash8", &geohash8, py::arg("lat"), py::arg("lon"));
  m.def(
      "geohash_decode",
      [](const std::string& h) {
        const GeohashCell c = geohash_decode(h);
        return py::make_tuple(c.lat_min, c.lat_max, c.lon_min, c.lon_max);
      },
      py::arg("hash"), "(lat_min, lat_max, lon_min, lon_max)");

  m.def("median", &median, py::arg("values"));
  m.def(
      "rmse",
      [](const std::vector<double>& measured, const std::vector<double>& predicted) {
        if (measured.size() != predicted.size()) fail(Errc::InvalidParameter, "length mismatch");
        std::vector<MeasurementBin> bins;
        for (std::size_t i = 0; i < measured.size(); ++i) bins.push_back(make_bin(measured[i], predicted[i], 3, true));
        return rmse(bins);
      },
      py::arg("measured"), py::arg("predicted"), "RMSE over bin medians, all treated as valid.");
  m.def(
      "bin_is_valid",
      [](std::size_t count, double median_measured_db, double max_path_loss_db) {
        return bin_validity(make_bin(median_measured_db, 0.0, count, false), max_path_loss_db);
      },
      py::arg("count"), py::arg("median_measured_db"), py::arg("max_path_loss_db"));

  m.def(
      "validate",
      [](const ElevationStack& stack, std::pair<double, double> tx, double tx_height_m,
         const std::filesystem::path& measurements, const std::string& mode, double ret_limit_db, std::size_t threads) {
        const auto records = read_measurements_csv(measurements);
        return report_dict(validate_measurements(records, stack, make_tx(tx, tx_height_m, 0.0, "vertical"),
                                                 make_config(mode, ret_limit_db, 2.5), threads));
      },
      py::arg("stack"), py::arg("tx"), py::arg("tx_height_m"), py::arg("measurements"), py::arg("mode") = "safe",
      py::arg("ret_limit_db") = 20.0, py::arg("threads") = 0);
}
