"""Differential operators on metric variants.

Derivatives of pipeline-computed metrics use fourth-order central
differences with one Richardson extrapolation level (step h_fd); the
catalogued analytic derivative is used for the original metric where
available.  Geodesics are integrated with classical fourth-order
Runge-Kutta.  Tensor norms and C^p distances are suprema over explicit
sample plans, measured against the base metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .cheeger import MetricVariant
from .gmanifold import DomainError, NumericalFailure
from .scenarios import Scenario, direction_pairs, sample_grid

__all__ = [
    "GeodesicResult",
    "H_FD",
    "SamplePlan",
    "TTensorSample",
    "UnsupportedOrderError",
    "christoffel",
    "cp_norm",
    "cp_norm_callable",
    "geodesic_integrate",
    "metric_derivatives",
    "orbit_invariant_drift",
    "speed_drift",
    "t_tensor",
]

# FD step for metric derivatives (coordinate units)
H_FD = 1e-4


class UnsupportedOrderError(ValueError):
    """C^p norms are implemented for p in {0, 1} only."""


def _use_analytic(v: MetricVariant) -> bool:
    return v.tag == "original" and v.scenario.metric.has_analytic_derivatives


def metric_derivatives(v: MetricVariant, x: np.ndarray,
                       h: float = H_FD) -> np.ndarray:
    """First chart derivatives dG[m, i, j] of the variant at x."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(_k.variant_metric_dx(
        v.scenario.code, v.scenario.params, v.tag_code, float(v.l), x, h,
        _use_analytic(v), 1e-8))
    if np.any(np.isnan(out)):
        raise NumericalFailure(f"metric derivatives of {v.label} failed at {x.tolist()}")
    return out


def christoffel(v: MetricVariant, x: np.ndarray, h: float = H_FD) -> np.ndarray:
    """Christoffel symbols Gamma[k, i, j] of the variant at x."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(_k.christoffel(
        v.scenario.code, v.scenario.params, v.tag_code, float(v.l), x, h,
        _use_analytic(v), 1e-8))
    if np.any(np.isnan(out)):
        raise NumericalFailure(f"christoffel of {v.label} failed at {x.tolist()}")
    return out


@dataclass(frozen=True)
class GeodesicResult:
    """Sampled geodesic states: row t is (position, velocity) after t
    steps of size dt."""

    variant: MetricVariant
    states: np.ndarray
    dt: float
    status: str
    steps: int

    @property
    def positions(self) -> np.ndarray:
        d = self.states.shape[1] // 2
        return self.states[: self.steps + 1, :d]

    @property
    def velocities(self) -> np.ndarray:
        d = self.states.shape[1] // 2
        return self.states[: self.steps + 1, d:]

    @property
    def arc_length(self) -> float:
        return self.steps * self.dt


_GEO_STATUS = {_k.OK: "ok", _k.LEFT_DOMAIN: "left_domain", _k.NUMERIC_FAIL: "numerical"}


def geodesic_integrate(v: MetricVariant, x0: np.ndarray, v0: np.ndarray,
                       length: float = 3.0, step: float = 1e-3,
                       unit_speed: bool = True, h: float = H_FD) -> GeodesicResult:
    """Integrate the geodesic equation of the variant from (x0, v0).

    v0 is normalised to unit variant speed unless unit_speed is False.
    Integration stops early at the chart boundary (status left_domain)
    or on numerical breakdown (status numerical).
    """
    scenario = v.scenario
    x0 = scenario.chart.require_inside(np.asarray(x0, dtype=float))
    v0 = np.asarray(v0, dtype=float)
    if step <= 0 or length <= 0:
        raise ValueError("geodesic step and length must be positive")
    if unit_speed:
        G = v.matrix(x0)
        speed = float(np.sqrt(v0 @ G @ v0))
        if speed <= 0:
            raise ValueError("initial velocity must be nonzero")
        v0 = v0 / speed
    n_steps = int(round(length / step))
    traj, status, steps = _k.geodesic_rk4(
        scenario.code, scenario.params, v.tag_code, float(v.l), x0, v0,
        n_steps, float(step), h, _use_analytic(v),
        scenario.chart.lo, scenario.chart.hi,
        scenario.chart.periodic.astype(np.int64), 1e-8)
    if status == _k.NUMERIC_FAIL:
        raise NumericalFailure(
            f"geodesic integration of {v.label} broke down at step {steps}")
    return GeodesicResult(variant=v, states=np.asarray(traj), dt=float(step),
                          status=_GEO_STATUS[int(status)], steps=int(steps))


def speed_drift(res: GeodesicResult, stride: int = 50) -> float:
    """Max deviation of the variant speed from its initial value along
    the trajectory, sampled every stride steps."""
    pos = res.positions[::stride]
    vel = res.velocities[::stride]
    speeds = np.empty(len(pos))
    for i, (x, w) in enumerate(zip(pos, vel)):
        G = res.variant.matrix(x)
        speeds[i] = w @ G @ w
    return float(np.max(np.abs(speeds - speeds[0])))


def orbit_invariant_drift(res: GeodesicResult) -> float:
    """Max drift of the scenario's orbit invariants along the
    trajectory; 0 for transitive actions (no invariants)."""
    inv = res.variant.scenario.orbit_invariants
    ref = inv(res.positions[0])
    if ref.size == 0:
        return 0.0
    vals = np.array([inv(x) for x in res.positions])
    return float(np.max(np.abs(vals - ref)))


@dataclass(frozen=True)
class TTensorSample:
    """Norm of the second fundamental tensor of the orbit at a point."""

    x: np.ndarray
    value: float
    vacuous: bool


def t_tensor(v: MetricVariant, x: np.ndarray, h: float = H_FD) -> TTensorSample:
    """Max variant norm of (nabla_{V_a} V_b)^perp over unit vertical
    pairs at x, with the vertical frame orthonormal in the variant.

    Vacuous (exact 0) when the orbit fills the manifold.
    """
    x = np.asarray(x, dtype=float)
    scenario = v.scenario
    val = float(_k.t_tensor_norm(
        scenario.code, scenario.params, v.tag_code, float(v.l), x, h, 1e-8))
    if np.isnan(val):
        raise NumericalFailure(f"T-tensor of {v.label} failed at {x.tolist()}")
    vacuous = scenario.transitive
    return TTensorSample(x=x, value=val, vacuous=vacuous)


@dataclass(frozen=True)
class SamplePlan:
    """Fixed evaluation plan for sup-norm estimates: grid points plus a
    batch of seeded direction pairs per point."""

    scenario: Scenario
    points: np.ndarray
    dirs: np.ndarray

    @classmethod
    def build(cls, scenario: Scenario, n_points: int = 200, n_dirs: int = 50,
              seed: int = 42, margin: float | None = None) -> "SamplePlan":
        pts = sample_grid(scenario, n_points, margin)
        dirs = direction_pairs(scenario, len(pts), n_dirs, seed)
        return cls(scenario=scenario, points=pts, dirs=dirs)

    @property
    def realized_points(self) -> int:
        return len(self.points)


def cp_norm(va: MetricVariant, vb: MetricVariant, plan: SamplePlan,
            p: int, h: float = H_FD) -> float:
    """C^p distance of two metric variants over the plan.

    C^0 is the sup over plan points and base-metric-unit direction pairs
    of |(g_a - g_b)(u, v)|; the pairs range over the orbit-adapted frame
    and the plan's seeded directions.  C^1 is the max of the C^0 value
    and the sup of first chart derivatives of the component difference.
    """
    if p not in (0, 1):
        raise UnsupportedOrderError(
            f"C^p norms support p in {{0, 1}}, got p = {p}")
    scenario = va.scenario
    if vb.scenario.scenario_id != scenario.scenario_id:
        raise ValueError("variants must live on the same scenario")
    c0 = float(_k.c0_block(
        scenario.code, scenario.params, va.tag_code, float(va.l),
        vb.tag_code, float(vb.l), plan.points, plan.dirs, 1e-8))
    if np.isnan(c0):
        raise NumericalFailure(f"C^0 norm of {va.label} - {vb.label} failed")
    if p == 0:
        return c0
    c1 = float(_k.c1_block(
        scenario.code, scenario.params, va.tag_code, float(va.l),
        vb.tag_code, float(vb.l), plan.points, h, 1e-8))
    if np.isnan(c1):
        raise NumericalFailure(f"C^1 norm of {va.label} - {vb.label} failed")
    return max(c0, c1)


def cp_norm_callable(delta_fn, plan: SamplePlan, p: int, h: float = H_FD) -> float:
    """C^p distance for an arbitrary difference evaluator (plain numpy
    reference path; the compiled path above must agree with it).

    delta_fn maps a chart point to the component difference matrix.
    """
    if p not in (0, 1):
        raise UnsupportedOrderError(
            f"C^p norms support p in {{0, 1}}, got p = {p}")
    scenario = plan.scenario
    best = 0.0
    d = scenario.dim
    for n, x in enumerate(plan.points):
        delta = delta_fn(x)
        G = scenario.metric_matrix(x)
        _G, _K, _mb, _iso, A, _P, status = _k.orbit_data(
            scenario.code, scenario.params, x, 1e-8)
        F, _L, fstatus = _k.adapted_frame(np.asarray(G), np.asarray(A))
        if status != _k.OK or fstatus != _k.OK:
            raise NumericalFailure(f"adapted frame failed at {x.tolist()}")
        best = max(best, float(_k._pair_sup(np.asarray(G), np.asarray(F),
                                            np.asarray(delta), plan.dirs[n])))
    if p == 0:
        return best
    for x in plan.points:
        for m in range(d):
            e = np.zeros(d)
            e[m] = 1.0
            d1 = (delta_fn(x - 2 * h * e) - 8 * delta_fn(x - h * e)
                  + 8 * delta_fn(x + h * e) - delta_fn(x + 2 * h * e)) / (12 * h)
            d2 = (delta_fn(x - h * e) - 8 * delta_fn(x - 0.5 * h * e)
                  + 8 * delta_fn(x + 0.5 * h * e) - delta_fn(x + h * e)) / (6 * h)
            deriv = (16.0 * d2 - d1) / 15.0
            best = max(best, float(np.max(np.abs(deriv))))
    return best
