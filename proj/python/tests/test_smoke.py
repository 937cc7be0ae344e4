import math

import pytest

import pysafe

LAT0, LON0 = 45.31, -76.11
STEP = 0.0001
SIZE = 200


def _write_scene(tmp_path):
    terrain = [[100.0 for _ in range(SIZE)] for _ in range(SIZE)]
    # 20 m canopy over a band of columns east of the transmitter.
    surface = [[120.0 if 90 <= c < 120 else 100.0 for c in range(SIZE)] for _ in range(SIZE)]
    transform = (LON0, STEP, 0.0, LAT0, 0.0, -STEP)
    dtm, dsm = tmp_path / "dtm.tif", tmp_path / "dsm.tif"
    pysafe.write_geotiff(dtm, terrain, transform, 4326)
    pysafe.write_geotiff(dsm, surface, transform, 4326)
    return pysafe.ElevationStack(dtm, dsm)


def _at(row, col):
    return (LAT0 - (row + 0.5) * STEP, LON0 + (col + 0.5) * STEP)


@pytest.fixture()
def stack(tmp_path):
    return _write_scene(tmp_path)


def test_predict_combines_terrain_and_foliage(stack):
    r = pysafe.predict(stack, _at(100, 20), 30.0, _at(100, 180), frequency_mhz=2669.0)
    assert r["foliage_depth_m"] > 0
    assert r["ret_loss_clamped_db"] == min(r["ret_loss_raw_db"], 20.0)
    assert r["pl_safe_db"] == r["pl_p1812_no_clutter_db"] + r["ret_loss_clamped_db"]
    bare = pysafe.predict(stack, _at(100, 20), 30.0, _at(100, 180), frequency_mhz=2669.0, mode="p1812-no-clutter")
    assert bare["pl_safe_db"] == r["pl_p1812_no_clutter_db"]


def test_profile_and_clutter(stack):
    p = pysafe.profile(stack, _at(100, 10), _at(100, 190))
    assert p["clutter_m"][0] == 0 and p["clutter_m"][-1] == 0
    assert set(p["clutter_m"]) <= {0.0, 15.0}
    assert 15.0 in p["clutter_m"]
    assert stack.clutter_height_at(*_at(50, 100)) == pytest.approx(20.0)
    grown = stack.apply_tree_growth(0.5, 7)
    assert grown.clutter_height_at(*_at(50, 100)) == pytest.approx(16.5)


def test_coverage_grid(stack):
    south, west = _at(150, 30)
    north, east = _at(50, 170)
    g = pysafe.coverage(stack, _at(100, 20), 30.0, 2669.0, (south, west, north, east), 200.0, threads=2)
    assert len(g["cells"]) == g["rows"] * g["cols"]
    assert any(c[3] == "ok" for c in g["cells"])


def test_ret_and_limits():
    assert pysafe.ret_loss(0.0, 30.0) == 0.0
    assert pysafe.ret_loss(25.0, 30.0) > 30.0
    curve = pysafe.ret_curve(30.0, 10.0, 1.0)
    assert len(curve) == 11
    assert all(b[1] >= a[1] for a, b in zip(curve, curve[1:]))
    assert pysafe.clamp_ret(45.0, 20.0) == 20.0
    assert pysafe.SEMI_RURAL_LIMIT_DB == 20.0
    assert pysafe.HEAVILY_FORESTED_LIMIT_DB == 30.0


def test_free_space_over_flat_ground():
    n = 35
    d = [i / (n - 1) for i in range(n)]
    lb = pysafe.path_loss_p1812(d, [0.0] * n, [0.0] * n, 3500.0, 30.0, 2.5, (45.0, -75.0), (45.009, -75.0))
    fspl = 20 * math.log10(4 * math.pi * 1000.0 * 3.5e9 / 299792458.0)
    assert abs(lb - fspl) < 1.5


def test_geohash_and_statistics():
    assert pysafe.geohash8(57.64911, 10.40744) == "u4pruydq"
    lat_min, lat_max, lon_min, lon_max = pysafe.geohash_decode("u4pruydq")
    assert lat_min <= 57.64911 <= lat_max and lon_min <= 10.40744 <= lon_max
    assert pysafe.median([100, 110, 120, 130]) == 115.0
    assert pysafe.rmse([100, 100], [103, 104]) == pytest.approx(math.sqrt(12.5))
    assert not pysafe.bin_is_valid(2, 100.0, 170.0)
    assert pysafe.bin_is_valid(3, 164.0, 170.0)
    assert not pysafe.bin_is_valid(3, 166.0, 170.0)


def test_validate_from_csv(stack, tmp_path):
    rows = ["lat,lon,pl_db,freq_mhz,tx_id,eirp_dbm,noise_floor_dbm,rx_height_m"]
    for k, col in enumerate([140, 150, 160, 170]):
        for j in range(3):
            lat, lon = _at(100 + 2 * k, col)
            pred = pysafe.predict(stack, _at(100, 20), 30.0, (lat, lon + j * 1e-6), frequency_mhz=2669.0)
            rows.append(f"{lat},{lon + j * 1e-6},{pred['pl_safe_db'] + 2.0},2669,tx,60,-120,2.5")
    csv = tmp_path / "m.csv"
    csv.write_text("\n".join(rows) + "\n")
    rep = pysafe.validate(stack, _at(100, 20), 30.0, csv, threads=2)
    assert rep["record_count"] == 12
    assert rep["mean_error"] == pytest.approx(-2.0)
    assert rep["rmse"] == pytest.approx(2.0)


def test_errors_carry_codes(stack):
    with pytest.raises(pysafe.SafeError) as e:
        pysafe.predict(stack, _at(100, 20), 30.0, _at(100, 180), frequency_mhz=7000.0)
    assert e.value.code == "FrequencyOutOfRange"
    with pytest.raises(pysafe.SafeError) as e:
        pysafe.geohash8(95.0, 0.0)
    assert e.value.code == "CoordinateOutOfRange"
