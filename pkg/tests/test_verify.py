"""Sweep assembly: rate fits, residual collectors, verdicts."""

import math

import numpy as np
import pytest

from cheegerdef.verify import (
    ALL_TESTS,
    SweepConfig,
    build_plan,
    convergence_series,
    geodesic_results,
    invariance_results,
    large_l_series,
    oracle_results,
    rate_fit,
    run_suite,
    spot_t_ratio,
    t_scaling_series,
)

SMALL = dict(n_points=40, n_dirs=8, invariance_points=8,
             invariance_elements=5, oracle_count=30, geodesic_length=1.5)


def test_rate_fit_recovers_power_law():
    ls = np.array([0.2, 0.1, 0.05, 0.025])
    fit = rate_fit(ls, 3.7 * ls**2)
    assert fit.status == "ok"
    assert fit.n_used == 4
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert 10.0**fit.intercept == pytest.approx(3.7, rel=1e-12)
    assert fit.max_log_residual < 1e-12


def test_rate_fit_negative_exponent():
    ls = np.array([10.0, 30.0, 100.0])
    fit = rate_fit(ls, 5.0 / ls**2)
    assert fit.slope == pytest.approx(-2.0, abs=1e-12)


def test_rate_fit_floor_handling():
    ls = np.array([0.2, 0.1, 0.05])
    fit = rate_fit(ls, [1e-20, 1e-21, 1e-22])
    assert fit.status == "exact"
    assert math.isnan(fit.slope)
    mixed = rate_fit(ls, [1e-3, 1e-20, 1e-21])
    assert mixed.status == "degenerate"
    assert mixed.n_used == 1


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(l_grid=(0.1,))
    with pytest.raises(ValueError):
        SweepConfig(l_grid=(0.05, 0.1))
    with pytest.raises(ValueError):
        SweepConfig(l_grid=(0.1, -0.05))
    with pytest.raises(ValueError):
        SweepConfig(enabled=("convergence", "curvature"))
    with pytest.raises(ValueError, match="unsupported C\\^p order"):
        SweepConfig(cp_order=2)
    cfg = SweepConfig(cp_order=0)
    assert cfg.cp_order == 0


def test_convergence_series_shape(s2_band):
    cfg = SweepConfig(**SMALL)
    plan = build_plan(s2_band, cfg)
    conv = convergence_series(s2_band, cfg, plan)
    assert len(conv["c0"]) == len(cfg.l_grid)
    assert conv["c0_fit"]["status"] == "ok"
    assert 1.9 < conv["c0_fit"]["slope"] < 2.1
    assert all(c1 >= c0 for c0, c1 in zip(conv["c0"], conv["c1"]))
    assert np.isfinite(conv["gap_ratio_spread"])
    assert conv["gap_ratio_spread"] < 3.0


def test_convergence_series_c0_only(s2_band):
    cfg = SweepConfig(cp_order=0, **SMALL)
    plan = build_plan(s2_band, cfg)
    conv = convergence_series(s2_band, cfg, plan)
    assert conv["c1_fit"] is None
    assert all(math.isnan(c) for c in conv["c1"])


def test_gap_matches_closed_form(s2_band):
    cfg = SweepConfig(**SMALL)
    plan = build_plan(s2_band, cfg)
    conv = convergence_series(s2_band, cfg, plan)
    lam = np.min(np.sin(plan.points[:, 1]) ** 2)
    for l, gap in zip(cfg.l_grid, conv["gap"]):
        assert gap == pytest.approx(l * l / (l * l + lam), rel=1e-12)


def test_t_scaling_series_band(s2_band):
    cfg = SweepConfig(**SMALL)
    plan = build_plan(s2_band, cfg)
    tsc = t_scaling_series(s2_band, cfg, plan)
    assert not tsc["vacuous"]
    assert tsc["t_fit"]["status"] == "ok"
    assert 1.8 < tsc["t_fit"]["slope"] < 2.2


def test_t_scaling_series_vacuous_for_transitive(su2_s2):
    cfg = SweepConfig(**SMALL)
    plan = build_plan(su2_s2, cfg)
    tsc = t_scaling_series(su2_s2, cfg, plan)
    assert tsc["vacuous"]
    assert tsc["t_fit"] is None


def test_spot_t_ratio_band(s2_band):
    val = spot_t_ratio(s2_band, np.array([0.5, np.pi / 4]), 0.1)
    assert val == pytest.approx(0.01 / 0.51, abs=1e-6)


def test_geodesic_results_band(s2_band):
    cfg = SweepConfig(**SMALL)
    geo = geodesic_results(s2_band, cfg)
    assert not geo["vacuous"]
    starts = geo["starts"]
    assert len(starts) == 3
    for entry in starts:
        assert entry["limit_drift"] < 1e-6
        assert entry["base_drift"] > 1e-3
        assert entry["limit_speed_drift"] < 1e-8


def test_geodesic_results_vacuous_for_transitive(su2_s2):
    cfg = SweepConfig(**SMALL)
    geo = geodesic_results(su2_s2, cfg)
    assert geo["vacuous"]


def test_invariance_results_fields(su2_s2):
    cfg = SweepConfig(**SMALL)
    plan = build_plan(su2_s2, cfg)
    inv = invariance_results(su2_s2, cfg, plan)
    assert inv["max_residual"] < 1e-8
    assert inv["horizontal_residual"] < 1e-10
    assert inv["kappa_residual"] < 1e-10
    assert inv["kappa_iso_residual"] < 1e-10
    assert inv["n_elements"] == 5
    assert {"original", "limit"} == set(inv["static"])
    assert len(inv["by_l"]) == len(cfg.l_grid)


def test_large_l_series_slope(s2_band):
    cfg = SweepConfig(**SMALL)
    plan = build_plan(s2_band, cfg)
    lrg = large_l_series(s2_band, cfg, plan)
    assert -2.2 < lrg["fit"]["slope"] < -1.8


def test_oracle_results_routes_agree(su2_s2):
    cfg = SweepConfig(**SMALL)
    orc = oracle_results(su2_s2, cfg)
    assert orc["n_samples"] >= 30
    assert orc["kernel_max_diff"] < 1e-10
    assert orc["reference_max_diff"] < 1e-10
    assert orc["cross_max_diff"] < 1e-10


def test_run_suite_full_band(s2_band):
    cfg = SweepConfig(**SMALL)
    res = run_suite(s2_band, cfg)
    assert res["passed"]
    names = [v["criterion"] for v in res["verdicts"]]
    for expected in ("c0_rate_window", "c1_rate_window", "gap_ratio_bounded",
                     "t_rate_window", "geodesic_limit_drift",
                     "geodesic_speed_conservation",
                     "geodesic_base_drift_discriminates",
                     "invariance_residual", "horizontal_block_static",
                     "kappa_identity", "kappa_isotropy",
                     "large_l_rate_window", "oracle_equivalence"):
        assert expected in names
    assert len(res["rows"]) == len(cfg.l_grid)
    row = res["rows"][0]
    assert set(row) == {"l", "c0_diff", "c1_diff", "t_ratio_max",
                        "gap_residual", "invariance_residual"}


def test_run_suite_subset_of_tests(s2_band):
    cfg = SweepConfig(enabled=("convergence",), **SMALL)
    res = run_suite(s2_band, cfg)
    names = {v["criterion"] for v in res["verdicts"]}
    assert names == {"c0_rate_window", "c1_rate_window", "gap_ratio_bounded"}
    assert "t_scaling" not in res
    assert math.isnan(res["rows"][0]["t_ratio_max"])


def test_run_suite_vacuous_verdicts_pass(su2_s2):
    cfg = SweepConfig(**SMALL)
    res = run_suite(su2_s2, cfg)
    assert res["passed"]
    by_name = {v["criterion"]: v for v in res["verdicts"]}
    assert by_name["t_rate_window"].get("note") == "vacuous"
    assert by_name["geodesic_limit_drift"].get("note") == "vacuous"
    assert "geodesic_base_drift_discriminates" not in by_name


def test_run_suite_timings_are_private(s2_band):
    cfg = SweepConfig(enabled=("convergence",), **SMALL)
    res = run_suite(s2_band, cfg)
    assert "_timings" in res
    assert res["_timings"]["total"] > 0


def test_all_tests_tuple_is_canonical():
    assert ALL_TESTS == ("convergence", "t_scaling", "geodesic",
                         "invariance", "large_l", "oracle")
