import csv

import numpy as np
import pytest

from tiltcell.cli import RunConfig, load_config, main

TINY = """
# quick operating point for tests
segment_step = 75.0
n_fadings = 30
cst_drops = 1
nmt_drops = 2
tilt_min = 15.0
tilt_max = 17.0
grid_resolution = 25.0
d_frac_min = 0.6
d_frac_max = 0.6
sched_drops = 1
sched_users_per_cell = 2
max_slots = 200
"""


@pytest.fixture()
def tiny_cfg(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY)
    return path


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_config_defaults_and_validation():
    cfg = RunConfig()
    cfg.validate()
    assert (cfg.users_per_cell, cfg.sched_users_per_cell) == (6, 8)
    assert cfg.sched_drops == 200
    for field, bad in (("users_per_cell", 9), ("sched_users_per_cell", 0),
                       ("tilt_step", 0.0), ("n_fadings", 0),
                       ("d_frac_min", 0.0)):
        broken = RunConfig(**{field: bad})
        with pytest.raises(ValueError):
            broken.validate()
    with pytest.raises(ValueError):
        RunConfig(tilt_min=30.0, tilt_max=10.0).validate()


def test_load_config(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("seed = 7\ntilt_max = 20.0  # inline comment\n\n")
    cfg = load_config(path)
    assert cfg.seed == 7
    assert cfg.tilt_max == 20.0
    assert cfg.n_t == 8  # untouched default

    path.write_text("not_a_key = 3\n")
    with pytest.raises(ValueError, match="not_a_key"):
        load_config(path)
    path.write_text("just words\n")
    with pytest.raises(ValueError, match="expected"):
        load_config(path)
    path.write_text("n_t = long\n")
    with pytest.raises(ValueError):
        load_config(path)


def test_cli_rejects_bad_input(tiny_cfg, tmp_path):
    with pytest.raises(SystemExit):
        main(["frobnicate", "--out", str(tmp_path)])
    with pytest.raises(SystemExit):
        main(["tilt-sweep", "--threads", "0", "--out", str(tmp_path)])
    bad = tmp_path / "bad.cfg"
    bad.write_text("users_per_cell = 11\n")
    with pytest.raises(SystemExit):
        main(["tilt-sweep", "--config", str(bad), "--out", str(tmp_path)])


def test_validate_rates_csv(tiny_cfg, tmp_path):
    out = tmp_path / "o"
    assert main(["validate-rates", "--config", str(tiny_cfg),
                 "--out", str(out)]) == 0
    rows = _rows(out / "rate_validation.csv")
    assert rows[0] == ["distance_m", "cst_analytic", "cst_mc",
                       "nmt_analytic", "nmt_mc"]
    assert len(rows) == 3  # 75 m and 150 m
    assert [float(r[0]) for r in rows[1:]] == [75.0, 150.0]
    for r in rows[1:]:
        assert all(float(v) > 0.0 for v in r[1:])


def test_validate_rates_reproducible_and_thread_invariant(tiny_cfg,
                                                          tmp_path):
    args = ["validate-rates", "--config", str(tiny_cfg)]
    main(args + ["--out", str(tmp_path / "a"), "--threads", "1"])
    main(args + ["--out", str(tmp_path / "b"), "--threads", "3"])
    a = (tmp_path / "a" / "rate_validation.csv").read_bytes()
    b = (tmp_path / "b" / "rate_validation.csv").read_bytes()
    assert a == b


def test_validate_rates_seed_override(tiny_cfg, tmp_path):
    args = ["validate-rates", "--config", str(tiny_cfg)]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b"), "--seed", "99"])
    rows_a = _rows(tmp_path / "a" / "rate_validation.csv")[1:]
    rows_b = _rows(tmp_path / "b" / "rate_validation.csv")[1:]
    for ra, rb in zip(rows_a, rows_b):
        assert ra[1] == rb[1] and ra[3] == rb[3]  # analytic unchanged
        assert ra[2] != rb[2]  # Monte Carlo columns move with the seed


def test_tilt_sweep_csv(tiny_cfg, tmp_path):
    out = tmp_path / "o"
    main(["tilt-sweep", "--config", str(tiny_cfg), "--out", str(out),
          "--threads", "2"])
    rows = _rows(out / "tilt_sweep.csv")
    assert rows[0] == ["tilt_deg", "cst_edge", "cst_average", "cst_peak",
                       "nmt_edge", "nmt_average", "nmt_peak"]
    assert [float(r[0]) for r in rows[1:]] == [15.0, 16.0, 17.0]
    main(["tilt-sweep", "--config", str(tiny_cfg), "--out",
          str(tmp_path / "p"), "--threads", "1"])
    assert (out / "tilt_sweep.csv").read_bytes() == \
        (tmp_path / "p" / "tilt_sweep.csv").read_bytes()


def test_optimize_regions_csv(tiny_cfg, tmp_path):
    out = tmp_path / "o"
    main(["optimize-regions", "--config", str(tiny_cfg), "--out", str(out)])
    surface = _rows(out / "region_surface.csv")
    assert surface[0] == ["d_int_m", "beta_cst_deg", "beta_nmt_deg",
                          "avg_throughput"]
    assert len(surface) == 2  # single d_frac in the tiny config
    assert float(surface[1][0]) == pytest.approx(90.0)
    chosen = _rows(out / "region_params.csv")
    assert chosen[0][-1] == "interior_area_fraction"
    assert float(chosen[1][3]) == pytest.approx(
        np.pi * 90.0 ** 2 / (1.5 * np.sqrt(3.0) * 150.0 ** 2))


def test_compare_systems_csv(tiny_cfg, tmp_path):
    out = tmp_path / "o"
    main(["compare-systems", "--config", str(tiny_cfg), "--out", str(out),
          "--threads", "2"])
    names = ["uncoord-cst-e", "uncoord-cst-a", "nmt-e", "nmt-a", "am-3d-bf"]
    cdf = _rows(out / "compare_cdf.csv")
    assert cdf[0] == names
    assert len(cdf) == 1 + 6  # one drop of 3 cells x 2 users, sorted columns
    for col in range(5):
        vals = [float(r[col]) for r in cdf[1:]]
        assert vals == sorted(vals)
    summary = _rows(out / "compare_summary.csv")
    assert summary[0] == ["variant", "edge", "average", "peak"]
    assert [r[0] for r in summary[1:]] == names
    gains = _rows(out / "compare_gains.csv")
    assert [r[0] for r in gains[1:]] == ["am_edge_loss_vs_nmt_e",
                                         "am_avg_gain_vs_nmt_a",
                                         "am_peak_gain_vs_cst_a"]
