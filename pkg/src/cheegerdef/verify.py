"""Verification suite: convergence rates, fiber geometry, invariance.

All checks work over explicit deterministic sample plans and report
plain dicts ready for serialization.  The measured quantities:

- C^0/C^1 distance of the rescaled family to its limit across the l
  grid, with log-log rate fits (expected order 2);
- the pullback gap to the bi-invariant form on the orbit, with the
  boundedness ratio of gap / l^2 across the grid;
- the ratio of fundamental-tensor norms of the rescaled family against
  the base metric (expected order 2), skipping points where the base
  norm sits below the vacuous floor;
- geodesic drift of orbit invariants under the limit metric (orbits
  totally geodesic) against the base metric (drift expected where
  catalogued);
- isometry invariance of every family member under sampled group
  elements, the static horizontal block, and the duality identity of
  the orbit projection;
- agreement of the two deformation routes, compiled and reference;
- the large-l return of the deformed metric to the base metric
  (expected order -2).
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels as _k
from .cheeger import MetricVariant, kappa, variant
from .gmanifold import NumericalFailure, killing_data
from .scenarios import Scenario, invariance_elements, oracle_samples
from .tensor_calc import (SamplePlan, geodesic_integrate, orbit_invariant_drift,
                          speed_drift, t_tensor)

__all__ = [
    "ALL_TESTS",
    "RateFit",
    "SweepConfig",
    "convergence_series",
    "geodesic_results",
    "invariance_results",
    "large_l_series",
    "oracle_results",
    "rate_fit",
    "run_suite",
    "spot_t_ratio",
    "t_scaling_series",
]

ALL_TESTS = ("convergence", "t_scaling", "geodesic", "invariance",
             "large_l", "oracle")

DEFAULT_L_GRID = (0.2, 0.1, 0.05, 0.025)
DEFAULT_LARGE_L_GRID = (10.0, 30.0, 100.0)


@dataclass(frozen=True)
class SweepConfig:
    """Knobs of the verification suite with catalogued defaults."""

    l_grid: tuple[float, ...] = DEFAULT_L_GRID
    large_l_grid: tuple[float, ...] = DEFAULT_LARGE_L_GRID
    n_points: int = 200
    n_dirs: int = 50
    margin: float | None = None
    seed: int = 42
    h_fd: float = 1e-4
    geodesic_step: float = 1e-3
    geodesic_length: float = 3.0
    geodesic_transverse: tuple[float, ...] | None = None
    invariance_points: int = 30
    invariance_elements: int = 20
    oracle_count: int = 120
    cp_order: int = 1
    enabled: tuple[str, ...] = ALL_TESTS
    # verdict thresholds
    c0_slope_window: tuple[float, float] = (1.9, 2.1)
    c1_slope_window: tuple[float, float] = (1.8, 2.2)
    t_slope_window: tuple[float, float] = (1.8, 2.2)
    large_l_slope_window: tuple[float, float] = (-2.2, -1.8)
    gap_ratio_max: float = 3.0
    geo_limit_drift_max: float = 1e-6
    geo_base_drift_min: float = 1e-3
    speed_drift_max: float = 1e-8
    invariance_max: float = 1e-8
    horizontal_max: float = 1e-10
    kappa_max: float = 1e-10
    oracle_max: float = 1e-10
    t_floor: float = 1e-8

    def __post_init__(self) -> None:
        if len(self.l_grid) < 2:
            raise ValueError("l_grid needs at least two values")
        if any(l <= 0 for l in self.l_grid + self.large_l_grid):
            raise ValueError("deformation parameters must be positive")
        if list(self.l_grid) != sorted(self.l_grid, reverse=True):
            raise ValueError("l_grid must be strictly decreasing")
        unknown = set(self.enabled) - set(ALL_TESTS)
        if unknown:
            raise ValueError(f"unknown tests in 'enabled': {sorted(unknown)}")
        if self.cp_order not in (0, 1):
            raise ValueError(
                f"unsupported C^p order {self.cp_order}: p must be 0 or 1")


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log10(value) against log10(l)."""

    slope: float
    intercept: float
    max_log_residual: float
    n_used: int
    status: str  # ok | exact | degenerate


def rate_fit(ls, values, floor: float = 1e-15) -> RateFit:
    """Fit a power law to a series, ignoring values at the noise floor.

    Values below floor are treated as exactly converged; with fewer than
    two usable points the fit is flagged instead of extrapolated.
    """
    ls = np.asarray(ls, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = np.isfinite(values) & (values > floor)
    if np.count_nonzero(keep) < 2:
        status = "exact" if np.all(values[np.isfinite(values)] <= floor) else "degenerate"
        return RateFit(slope=float("nan"), intercept=float("nan"),
                       max_log_residual=float("nan"),
                       n_used=int(np.count_nonzero(keep)), status=status)
    lx = np.log10(ls[keep])
    ly = np.log10(values[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.max(np.abs(slope * lx + intercept - ly)))
    return RateFit(slope=float(slope), intercept=float(intercept),
                   max_log_residual=resid, n_used=int(np.count_nonzero(keep)),
                   status="ok")


def build_plan(scenario: Scenario, cfg: SweepConfig) -> SamplePlan:
    return SamplePlan.build(scenario, n_points=cfg.n_points, n_dirs=cfg.n_dirs,
                            seed=cfg.seed, margin=cfg.margin)


def convergence_series(scenario: Scenario, cfg: SweepConfig,
                       plan: SamplePlan) -> dict:
    """C^0/C^1 distances of the rescaled family to the limit and the
    pullback gap, per l, with rate fits."""
    code, par = scenario.code, scenario.params
    c0s, c1s, gaps = [], [], []
    for l in cfg.l_grid:
        c0 = float(_k.c0_block(code, par, _k.RESCALED, l, _k.LIMIT, 0.0,
                               plan.points, plan.dirs, 1e-8))
        gap = float(_k.gap_block(code, par, l, plan.points, 1e-8))
        if np.isnan(c0) or np.isnan(gap):
            raise NumericalFailure(
                f"convergence series failed at l={l} on {scenario.scenario_id}")
        c0s.append(c0)
        if cfg.cp_order >= 1:
            c1d = float(_k.c1_block(code, par, _k.RESCALED, l, _k.LIMIT, 0.0,
                                    plan.points, cfg.h_fd, 1e-8))
            if np.isnan(c1d):
                raise NumericalFailure(
                    f"C^1 series failed at l={l} on {scenario.scenario_id}")
            c1s.append(max(c0, c1d))
        else:
            c1s.append(float("nan"))
        gaps.append(gap)
    ls = np.asarray(cfg.l_grid)
    ratios = np.asarray(gaps) / ls**2
    finite = ratios[np.isfinite(ratios) & (ratios > 0)]
    ratio_spread = float(np.max(finite) / np.min(finite)) if finite.size else float("nan")
    return {
        "l_grid": list(cfg.l_grid),
        "c0": c0s,
        "c1": c1s,
        "gap": gaps,
        "c0_fit": asdict(rate_fit(ls, c0s)),
        "c1_fit": asdict(rate_fit(ls, c1s)) if cfg.cp_order >= 1 else None,
        "gap_over_l2": [float(r) for r in ratios],
        "gap_ratio_spread": ratio_spread,
    }


def t_scaling_series(scenario: Scenario, cfg: SweepConfig,
                     plan: SamplePlan) -> dict:
    """Max ratio of fundamental-tensor norms (rescaled over base) per l.

    Points where the base norm is below the floor carry no information
    about the ratio and are excluded but counted.  Scenarios whose base
    norm vanishes everywhere report a vacuous series.
    """
    code, par = scenario.code, scenario.params
    ratios, excluded = [], []
    vacuous = scenario.transitive
    for l in cfg.l_grid:
        vals_var, vals_orig = _k.t_pair_block(code, par, _k.RESCALED, l,
                                              plan.points, cfg.h_fd, 1e-8)
        vals_var = np.asarray(vals_var)
        vals_orig = np.asarray(vals_orig)
        keep = vals_orig > cfg.t_floor
        excluded.append(int(np.count_nonzero(~keep)))
        if not np.any(keep):
            ratios.append(float("nan"))
            vacuous = True
        else:
            ratios.append(float(np.max(vals_var[keep] / vals_orig[keep])))
    fit = rate_fit(np.asarray(cfg.l_grid), ratios) if not vacuous else None
    return {
        "l_grid": list(cfg.l_grid),
        "t_ratio_max": ratios,
        "excluded_points": excluded,
        "vacuous": vacuous,
        "t_fit": asdict(fit) if fit is not None else None,
    }


def spot_t_ratio(scenario: Scenario, x: np.ndarray, l: float,
                 h: float = 1e-4) -> float:
    """Pointwise ratio of fundamental-tensor norms, rescaled over base."""
    num = t_tensor(variant(scenario, "rescaled", l), x, h).value
    den = t_tensor(variant(scenario, "original"), x, h).value
    return num / den


def geodesic_results(scenario: Scenario, cfg: SweepConfig) -> dict:
    """Orbit-invariant drift of vertical geodesics under the limit and
    base metrics, per catalogued start."""
    if scenario.transitive:
        return {"vacuous": True, "starts": []}
    transverse = cfg.geodesic_transverse or scenario.geodesic_transverse
    limit = variant(scenario, "limit")
    base = variant(scenario, "original")
    starts = []
    for c in transverse:
        x0 = scenario.start_from_transverse(c)
        kd = killing_data(scenario, x0)
        v0 = kd.A[:, 0]
        res_lim = geodesic_integrate(limit, x0, v0, length=cfg.geodesic_length,
                                     step=cfg.geodesic_step, h=cfg.h_fd)
        res_base = geodesic_integrate(base, x0, v0, length=cfg.geodesic_length,
                                      step=cfg.geodesic_step, h=cfg.h_fd)
        starts.append({
            "transverse": float(c),
            "limit_drift": orbit_invariant_drift(res_lim),
            "limit_speed_drift": speed_drift(res_lim),
            "limit_status": res_lim.status,
            "base_drift": orbit_invariant_drift(res_base),
            "base_speed_drift": speed_drift(res_base),
            "base_status": res_base.status,
        })
    return {"vacuous": False, "starts": starts}


def _metric_fn(scenario: Scenario, tag_code: int, l: float):
    code, par = scenario.code, scenario.params

    def fn(x: np.ndarray) -> np.ndarray:
        return np.asarray(_k.variant_metric(code, par, tag_code, l,
                                            np.asarray(x, dtype=float), 1e-8))

    return fn


def invariance_results(scenario: Scenario, cfg: SweepConfig,
                       plan: SamplePlan) -> dict:
    """Isometry-invariance residuals for the whole family, plus the
    static horizontal block and the orbit duality identity.

    The invariance residual of a variant is the sup over sampled group
    elements and plan points of the max-abs difference between the
    pulled-back and local metric components (analytic action Jacobians).
    """
    stride = max(1, len(plan.points) // max(1, cfg.invariance_points))
    pts = plan.points[::stride]
    elements = invariance_elements(scenario, cfg.invariance_elements, cfg.seed)
    code, par = scenario.code, scenario.params

    def residual(tag_code: int, l: float) -> float:
        fn = _metric_fn(scenario, tag_code, l)
        worst = 0.0
        for g in elements:
            for x in pts:
                y = scenario.act(g, x)
                J = scenario.action_jacobian(g, x)
                pulled = J.T @ fn(y) @ J
                worst = max(worst, float(np.max(np.abs(pulled - fn(x)))))
        return worst

    static = {
        "original": residual(_k.ORIGINAL, 0.0),
        "limit": residual(_k.LIMIT, 0.0),
    }
    by_l = []
    for l in cfg.l_grid:
        by_l.append({
            "l": float(l),
            "cheeger": residual(_k.CHEEGER, l),
            "rescaled": residual(_k.RESCALED, l),
        })

    # horizontal block of the deformed family versus the base metric
    horiz_worst = 0.0
    kappa_worst = 0.0
    kappa_iso_worst = 0.0
    for n, x in enumerate(pts):
        G, K, mb, iso, A, P, status = _k.orbit_data(code, par, x, 1e-8)
        F, L, fstatus = _k.adapted_frame(np.asarray(G), np.asarray(A))
        if status != _k.OK or fstatus != _k.OK:
            return {"error": f"frame failed at {x.tolist()}"}
        r = A.shape[1]
        H = np.asarray(F)[:, r:]
        for l in cfg.l_grid:
            for tag in (_k.CHEEGER, _k.RESCALED):
                Gv = _metric_fn(scenario, tag, l)(x)
                horiz_worst = max(horiz_worst,
                                  float(np.max(np.abs((Gv - G).T @ H))) if H.size else 0.0)
        Glim = _metric_fn(scenario, _k.LIMIT, 0.0)(x)
        if H.size:
            horiz_worst = max(horiz_worst, float(np.max(np.abs((Glim - G).T @ H))))
        # duality identity of the orbit projection against the raw pairing
        kd = killing_data(scenario, x)
        v = plan.dirs[min(n * stride, len(plan.dirs) - 1), 0, 0]
        kv = kappa(kd, np.asarray(G), v)
        raw = np.asarray(K).T @ (np.asarray(G) @ v)
        kappa_worst = max(kappa_worst, float(np.max(np.abs(kv - raw))))
        # the solved vector must carry no isotropy component
        if kd.isotropy_basis.size:
            kappa_iso_worst = max(
                kappa_iso_worst,
                float(np.max(np.abs(kd.isotropy_basis.T @ raw))))

    overall = max(max(static.values()),
                  max(max(row["cheeger"], row["rescaled"]) for row in by_l))
    return {
        "static": static,
        "by_l": by_l,
        "max_residual": overall,
        "horizontal_residual": horiz_worst,
        "kappa_residual": kappa_worst,
        "kappa_iso_residual": kappa_iso_worst,
        "n_points": int(len(pts)),
        "n_elements": int(len(elements)),
    }


def large_l_series(scenario: Scenario, cfg: SweepConfig,
                   plan: SamplePlan) -> dict:
    """C^0 distance of the deformed metric to the base metric for large
    l, with the rate fit of the decay."""
    code, par = scenario.code, scenario.params
    c0s = []
    for l in cfg.large_l_grid:
        c0 = float(_k.c0_block(code, par, _k.CHEEGER, l, _k.ORIGINAL, 0.0,
                               plan.points, plan.dirs, 1e-8))
        if np.isnan(c0):
            raise NumericalFailure(
                f"large-l series failed at l={l} on {scenario.scenario_id}")
        c0s.append(c0)
    return {
        "l_grid": list(cfg.large_l_grid),
        "c0": c0s,
        "fit": asdict(rate_fit(np.asarray(cfg.large_l_grid), c0s)),
    }


def oracle_results(scenario: Scenario, cfg: SweepConfig) -> dict:
    """Agreement of the deformation routes on seeded samples.

    kernel_max_diff compares the two compiled routes across all samples;
    reference_max_diff compares the two plain-numpy operator routes on a
    subsample; cross_max_diff compares compiled against reference.
    """
    pts, ls = oracle_samples(scenario, cfg.oracle_count, cfg.seed)
    code, par = scenario.code, scenario.params
    kernel_max = float(_k.oracle_block(code, par, pts, ls, 1e-8))
    ref_max = 0.0
    cross_max = 0.0
    stride = max(1, len(pts) // 25)
    for x, l in zip(pts[::stride], ls[::stride]):
        va = variant(scenario, "cheeger", float(l))
        ref1 = va.reference_matrix(x)
        ref2 = MetricVariant(scenario, "cheeger_closed_form", float(l)).reference_matrix(x)
        ref_max = max(ref_max, float(np.max(np.abs(ref1 - ref2))))
        cross_max = max(cross_max, float(np.max(np.abs(va.matrix(x) - ref1))))
    return {
        "n_samples": int(len(pts)),
        "kernel_max_diff": kernel_max,
        "reference_max_diff": ref_max,
        "cross_max_diff": cross_max,
    }


def _verdict(name: str, passed: bool, measured, threshold, note: str = "") -> dict:
    out = {"criterion": name, "passed": bool(passed),
           "measured": measured, "threshold": threshold}
    if note:
        out["note"] = note
    return out


def _window_verdict(name: str, fit: dict | None, window: tuple[float, float],
                    vacuous: bool = False) -> dict:
    if vacuous or fit is None:
        return _verdict(name, True, None, list(window), note="vacuous")
    if fit["status"] != "ok":
        # exactly converged series have nothing to rate-fit
        return _verdict(name, fit["status"] == "exact", fit["slope"],
                        list(window), note=fit["status"])
    ok = window[0] <= fit["slope"] <= window[1]
    return _verdict(name, ok, fit["slope"], list(window))


def run_suite(scenario: Scenario, cfg: SweepConfig) -> dict:
    """Run the enabled verification tests and assemble rows, fits and
    verdicts for reporting."""
    t_start = time.perf_counter()
    plan = build_plan(scenario, cfg)
    results: dict = {
        "scenario": scenario.scenario_id,
        "plan_points": int(plan.realized_points),
        "plan_dirs": int(cfg.n_dirs),
    }
    timings: dict[str, float] = {}
    enabled = cfg.enabled

    conv = tsc = geo = inv = lrg = orc = None
    if "convergence" in enabled:
        t0 = time.perf_counter()
        conv = convergence_series(scenario, cfg, plan)
        timings["convergence"] = time.perf_counter() - t0
        results["convergence"] = conv
    if "t_scaling" in enabled:
        t0 = time.perf_counter()
        tsc = t_scaling_series(scenario, cfg, plan)
        timings["t_scaling"] = time.perf_counter() - t0
        results["t_scaling"] = tsc
    if "geodesic" in enabled:
        t0 = time.perf_counter()
        geo = geodesic_results(scenario, cfg)
        timings["geodesic"] = time.perf_counter() - t0
        results["geodesic"] = geo
    if "invariance" in enabled:
        t0 = time.perf_counter()
        inv = invariance_results(scenario, cfg, plan)
        timings["invariance"] = time.perf_counter() - t0
        results["invariance"] = inv
    if "large_l" in enabled:
        t0 = time.perf_counter()
        lrg = large_l_series(scenario, cfg, plan)
        timings["large_l"] = time.perf_counter() - t0
        results["large_l"] = lrg
    if "oracle" in enabled:
        t0 = time.perf_counter()
        orc = oracle_results(scenario, cfg)
        timings["oracle"] = time.perf_counter() - t0
        results["oracle"] = orc

    # per-l rows in the fixed CSV column order
    nan = float("nan")
    rows = []
    inv_by_l = {row["l"]: max(row["cheeger"], row["rescaled"])
                for row in inv["by_l"]} if inv and "by_l" in inv else {}
    inv_static = max(inv["static"].values()) if inv and "static" in inv else nan
    for i, l in enumerate(cfg.l_grid):
        rows.append({
            "l": float(l),
            "c0_diff": conv["c0"][i] if conv else nan,
            "c1_diff": conv["c1"][i] if conv else nan,
            "t_ratio_max": tsc["t_ratio_max"][i] if tsc else nan,
            "gap_residual": conv["gap"][i] if conv else nan,
            "invariance_residual": max(inv_by_l[l], inv_static) if inv_by_l else nan,
        })
    results["rows"] = rows

    verdicts = []
    if conv:
        verdicts.append(_window_verdict("c0_rate_window", conv["c0_fit"],
                                        cfg.c0_slope_window))
        if conv["c1_fit"] is not None:
            verdicts.append(_window_verdict("c1_rate_window", conv["c1_fit"],
                                            cfg.c1_slope_window))
        spread = conv["gap_ratio_spread"]
        verdicts.append(_verdict("gap_ratio_bounded",
                                 bool(np.isfinite(spread) and spread < cfg.gap_ratio_max),
                                 spread, cfg.gap_ratio_max))
    if tsc:
        verdicts.append(_window_verdict("t_rate_window", tsc["t_fit"],
                                        cfg.t_slope_window, vacuous=tsc["vacuous"]))
    if geo:
        if geo["vacuous"]:
            verdicts.append(_verdict("geodesic_limit_drift", True, None,
                                     cfg.geo_limit_drift_max, note="vacuous"))
        else:
            worst_drift = max(s["limit_drift"] for s in geo["starts"])
            worst_speed = max(max(s["limit_speed_drift"], s["base_speed_drift"])
                              for s in geo["starts"])
            statuses_ok = all(s["limit_status"] == "ok" for s in geo["starts"])
            verdicts.append(_verdict(
                "geodesic_limit_drift",
                statuses_ok and worst_drift < cfg.geo_limit_drift_max,
                worst_drift, cfg.geo_limit_drift_max))
            verdicts.append(_verdict(
                "geodesic_speed_conservation",
                worst_speed < cfg.speed_drift_max,
                worst_speed, cfg.speed_drift_max))
            if scenario.expect_base_drift:
                min_base = min(s["base_drift"] for s in geo["starts"])
                verdicts.append(_verdict(
                    "geodesic_base_drift_discriminates",
                    min_base > cfg.geo_base_drift_min,
                    min_base, cfg.geo_base_drift_min))
    if inv:
        if "error" in inv:
            verdicts.append(_verdict("invariance_residual", False, inv["error"],
                                     cfg.invariance_max))
        else:
            verdicts.append(_verdict("invariance_residual",
                                     inv["max_residual"] < cfg.invariance_max,
                                     inv["max_residual"], cfg.invariance_max))
            verdicts.append(_verdict("horizontal_block_static",
                                     inv["horizontal_residual"] < cfg.horizontal_max,
                                     inv["horizontal_residual"], cfg.horizontal_max))
            verdicts.append(_verdict("kappa_identity",
                                     inv["kappa_residual"] < cfg.kappa_max,
                                     inv["kappa_residual"], cfg.kappa_max))
            verdicts.append(_verdict("kappa_isotropy",
                                     inv["kappa_iso_residual"] < cfg.kappa_max,
                                     inv["kappa_iso_residual"], cfg.kappa_max))
    if lrg:
        verdicts.append(_window_verdict("large_l_rate_window", lrg["fit"],
                                        cfg.large_l_slope_window))
    if orc:
        worst = max(orc["kernel_max_diff"], orc["reference_max_diff"],
                    orc["cross_max_diff"])
        verdicts.append(_verdict("oracle_equivalence", worst < cfg.oracle_max,
                                 worst, cfg.oracle_max))

    results["verdicts"] = verdicts
    results["passed"] = all(v["passed"] for v in verdicts)
    timings["total"] = time.perf_counter() - t_start
    # timings stay out of serialized reports to keep them byte-stable
    results["_timings"] = timings
    return results
