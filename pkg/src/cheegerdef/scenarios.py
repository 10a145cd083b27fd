"""Catalogue of group actions on model manifolds.

Each scenario packages a chart, an isometric action of a catalogued
group, the invariant base metric, a sampling region for the verification
sweeps, and catalogued defaults (geodesic starts, sampling margin).

Catalogued scenarios:

- s2_band: circle acting by rotation on a band of the round 2-sphere.
- warped_s2: the same action, warped fiber length sin(phi)^2(1+A sin(phi)).
- s3_hopf: circle acting along the Hopf fibers of the round 3-sphere.
- su2_s2: the rank-one special unitary group acting transitively on the
  round 2-sphere (isotropy a circle at every point).
- t2_flat: circle acting on the first factor of a flat 2-torus with
  orbit length parameter a.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as _k
from .gmanifold import Chart
from .lie_core import GroupElement, LieGroupModel, get_group

__all__ = [
    "ActionModel",
    "InvariantMetricField",
    "Scenario",
    "direction_pairs",
    "get_scenario",
    "invariance_elements",
    "list_scenarios",
    "oracle_samples",
    "rng_for",
    "sample_grid",
]

# sub-streams of the run seed for the counter-based generator
_STREAM_DIRECTIONS = 1
_STREAM_ELEMENTS = 2
_STREAM_ORACLE = 3


def rng_for(seed: int, stream: int) -> np.random.Generator:
    """Independent deterministic generator for (seed, stream)."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) + stream))


@dataclass(frozen=True)
class ActionModel:
    """Chart expression of a group action with its derivative."""

    group: LieGroupModel
    act: Callable[[GroupElement, np.ndarray], np.ndarray]
    jacobian: Callable[[GroupElement, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class InvariantMetricField:
    """Metric components in chart coordinates with optional analytic
    first derivatives."""

    matrix: Callable[[np.ndarray], np.ndarray]
    derivatives: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def has_analytic_derivatives(self) -> bool:
        return self.derivatives is not None


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    code: int
    group: LieGroupModel
    chart: Chart
    params: np.ndarray
    region_lo: np.ndarray
    region_hi: np.ndarray
    action: ActionModel
    metric: InvariantMetricField
    sample_margin: float
    geodesic_transverse: tuple[float, ...]
    start_from_transverse: Callable[[float], np.ndarray]
    orbit_invariants: Callable[[np.ndarray], np.ndarray]
    element_scale: float | None
    transitive: bool
    # orbits fail to be geodesic in the base metric, so the base-metric
    # drift check has discriminating power
    expect_base_drift: bool

    def act(self, g: GroupElement, x: np.ndarray) -> np.ndarray:
        return self.action.act(g, x)

    def action_jacobian(self, g: GroupElement, x: np.ndarray) -> np.ndarray:
        return self.action.jacobian(g, x)

    def metric_matrix(self, x: np.ndarray) -> np.ndarray:
        return self.metric.matrix(x)

    def metric_derivatives(self, x: np.ndarray) -> np.ndarray:
        return self.metric.derivatives(x)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def geodesic_starts(self) -> tuple[np.ndarray, ...]:
        return tuple(self.start_from_transverse(c) for c in self.geodesic_transverse)


def _so2_angle(M: np.ndarray) -> float:
    return float(np.arctan2(M[1, 0], M[0, 0]))


def _quat_to_rotation(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def _sphere_embed(x: np.ndarray) -> np.ndarray:
    th, ph = x
    sp = np.sin(ph)
    return np.array([sp * np.cos(th), sp * np.sin(th), np.cos(ph)])


def _sphere_coord_fields(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Embedded coordinate fields (d_theta p, d_phi p) at a chart point."""
    th, ph = x
    sp = np.sin(ph)
    cp = np.cos(ph)
    d_th = np.array([-sp * np.sin(th), sp * np.cos(th), 0.0])
    d_ph = np.array([cp * np.cos(th), cp * np.sin(th), -sp])
    return d_th, d_ph


def _su2_act(g: GroupElement, x: np.ndarray) -> np.ndarray:
    R = _quat_to_rotation(g.matrix[:, 0])
    p = R @ _sphere_embed(x)
    ph = float(np.arccos(np.clip(p[2], -1.0, 1.0)))
    th = float(np.arctan2(p[1], p[0]))
    # keep the angle on the branch nearest the input for continuity
    th += 2 * np.pi * np.round((x[0] - th) / (2 * np.pi))
    return np.array([th, ph])


def _su2_jacobian(g: GroupElement, x: np.ndarray) -> np.ndarray:
    R = _quat_to_rotation(g.matrix[:, 0])
    y = _su2_act(g, x)
    d_th_x, d_ph_x = _sphere_coord_fields(x)
    d_th_y, d_ph_y = _sphere_coord_fields(y)
    w_th = R @ d_th_x
    w_ph = R @ d_ph_x
    s2 = np.sin(y[1]) ** 2
    return np.array([
        [d_th_y @ w_th / s2, d_th_y @ w_ph / s2],
        [d_ph_y @ w_th, d_ph_y @ w_ph],
    ])


def _shift_action(group: LieGroupModel, shifted: tuple[int, ...], dim: int) -> ActionModel:
    """Circle action shifting the listed periodic coordinates in step."""

    def act(g: GroupElement, x: np.ndarray) -> np.ndarray:
        a = _so2_angle(g.matrix)
        y = np.array(x, dtype=float)
        for m in shifted:
            y[m] = y[m] + a
        return y

    def jacobian(g: GroupElement, x: np.ndarray) -> np.ndarray:
        return np.eye(dim)

    return ActionModel(group=group, act=act, jacobian=jacobian)


def _kernel_metric(code: int, params: np.ndarray) -> InvariantMetricField:
    def matrix(x: np.ndarray) -> np.ndarray:
        return np.asarray(_k.gm_metric(code, params, np.asarray(x, dtype=float)))

    def derivatives(x: np.ndarray) -> np.ndarray:
        return np.asarray(_k.gm_metric_dx(code, params, np.asarray(x, dtype=float)))

    return InvariantMetricField(matrix=matrix, derivatives=derivatives)


_TWO_PI = 2 * np.pi


def _build_s2_like(scenario_id: str, code: int, params: np.ndarray,
                   sample_margin: float) -> Scenario:
    group = get_group("u1")
    chart = Chart(labels=("theta", "phi"),
                  lo=np.array([0.0, 0.2]), hi=np.array([_TWO_PI, np.pi - 0.2]),
                  periodic=np.array([True, False]))
    return Scenario(
        scenario_id=scenario_id,
        code=code,
        group=group,
        chart=chart,
        params=params,
        region_lo=np.array([0.0, 0.4]),
        region_hi=np.array([_TWO_PI, np.pi - 0.4]),
        action=_shift_action(group, (0,), 2),
        metric=_kernel_metric(code, params),
        sample_margin=sample_margin,
        geodesic_transverse=(0.6, 0.9, 1.2),
        start_from_transverse=lambda c: np.array([0.3, float(c)]),
        orbit_invariants=lambda x: np.array([x[1]]),
        element_scale=None,
        transitive=False,
        expect_base_drift=True,
    )


def _build_s3_hopf(sample_margin: float) -> Scenario:
    group = get_group("u1")
    params = np.array([0.0])
    chart = Chart(labels=("xi1", "xi2", "eta"),
                  lo=np.array([0.0, 0.0, 0.15]),
                  hi=np.array([_TWO_PI, _TWO_PI, np.pi / 2 - 0.15]),
                  periodic=np.array([True, True, False]))
    return Scenario(
        scenario_id="s3_hopf",
        code=_k.S3_HOPF,
        group=group,
        chart=chart,
        params=params,
        region_lo=np.array([0.0, 0.0, 0.3]),
        region_hi=np.array([_TWO_PI, _TWO_PI, np.pi / 2 - 0.3]),
        action=_shift_action(group, (0, 1), 3),
        metric=_kernel_metric(_k.S3_HOPF, params),
        sample_margin=sample_margin,
        geodesic_transverse=(0.5, 0.8, 1.1),
        start_from_transverse=lambda c: np.array([0.5, 1.7, float(c)]),
        orbit_invariants=lambda x: np.array([x[0] - x[1], x[2]]),
        element_scale=None,
        transitive=False,
        expect_base_drift=False,
    )


def _build_su2_s2(sample_margin: float) -> Scenario:
    group = get_group("su2")
    params = np.array([0.0])
    chart = Chart(labels=("theta", "phi"),
                  lo=np.array([0.0, 0.25]), hi=np.array([_TWO_PI, np.pi - 0.25]),
                  periodic=np.array([True, False]))
    return Scenario(
        scenario_id="su2_s2",
        code=_k.SU2_S2,
        group=group,
        chart=chart,
        params=params,
        region_lo=np.array([0.0, 0.9]),
        region_hi=np.array([_TWO_PI, np.pi - 0.9]),
        action=ActionModel(group=group, act=_su2_act, jacobian=_su2_jacobian),
        metric=_kernel_metric(_k.SU2_S2, params),
        sample_margin=sample_margin,
        geodesic_transverse=(1.2, 1.6, 2.0),
        start_from_transverse=lambda c: np.array([0.3, float(c)]),
        orbit_invariants=lambda x: np.zeros(0),
        # bounded rotations keep transformed sample points inside the chart
        element_scale=0.6,
        transitive=True,
        expect_base_drift=False,
    )


def _build_t2_flat(orbit_length: float, sample_margin: float) -> Scenario:
    group = get_group("u1")
    params = np.array([float(orbit_length)])
    chart = Chart(labels=("x1", "x2"),
                  lo=np.array([0.0, 0.0]), hi=np.array([_TWO_PI, _TWO_PI]),
                  periodic=np.array([True, True]))
    return Scenario(
        scenario_id="t2_flat",
        code=_k.T2_FLAT,
        group=group,
        chart=chart,
        params=params,
        region_lo=np.array([0.0, 0.0]),
        region_hi=np.array([_TWO_PI, _TWO_PI]),
        action=_shift_action(group, (0,), 2),
        metric=_kernel_metric(_k.T2_FLAT, params),
        sample_margin=sample_margin,
        geodesic_transverse=(1.0, 3.0, 5.0),
        start_from_transverse=lambda c: np.array([0.7, float(c)]),
        orbit_invariants=lambda x: np.array([x[1]]),
        element_scale=None,
        transitive=False,
        expect_base_drift=False,
    )


_SCENARIO_IDS = ("s2_band", "warped_s2", "s3_hopf", "su2_s2", "t2_flat")


def list_scenarios() -> tuple[str, ...]:
    return _SCENARIO_IDS


def get_scenario(scenario_id: str, warp_amplitude: float = 0.3,
                 orbit_length: float = 1.0,
                 sample_margin: float = 0.1) -> Scenario:
    """Build a catalogued scenario.

    warp_amplitude applies to warped_s2 only, orbit_length to t2_flat
    only; both are ignored elsewhere.  sample_margin shrinks the sampling
    region away from non-periodic boundaries.
    """
    if sample_margin < 0:
        raise ValueError("sample_margin must be nonnegative")
    if scenario_id == "s2_band":
        return _build_s2_like("s2_band", _k.S2_BAND, np.array([0.0]), sample_margin)
    if scenario_id == "warped_s2":
        if not -0.9 < warp_amplitude < 0.9:
            raise ValueError("warp_amplitude must lie in (-0.9, 0.9)")
        return _build_s2_like("warped_s2", _k.WARPED_S2,
                              np.array([float(warp_amplitude)]), sample_margin)
    if scenario_id == "s3_hopf":
        return _build_s3_hopf(sample_margin)
    if scenario_id == "su2_s2":
        return _build_su2_s2(sample_margin)
    if scenario_id == "t2_flat":
        if orbit_length <= 0:
            raise ValueError("orbit_length must be positive")
        return _build_t2_flat(orbit_length, sample_margin)
    raise KeyError(f"unknown scenario '{scenario_id}'")


def sample_grid(scenario: Scenario, n_points: int,
                margin: float | None = None) -> np.ndarray:
    """Deterministic product grid over the sampling region.

    Periodic axes get evenly spaced open intervals, non-periodic axes
    closed intervals shrunk by the margin, so region boundary values are
    attained exactly.  The realized count is the nearest per-axis power
    at or around n_points and is echoed in run reports.
    """
    if margin is None:
        margin = scenario.sample_margin
    d = scenario.dim
    per_axis = max(2, int(round(n_points ** (1.0 / d))))
    axes = []
    for m in range(d):
        lo = scenario.region_lo[m]
        hi = scenario.region_hi[m]
        if scenario.chart.periodic[m]:
            axes.append(np.linspace(lo, hi, per_axis, endpoint=False))
        else:
            lo2, hi2 = lo + margin, hi - margin
            if lo2 >= hi2:
                raise ValueError(
                    f"margin {margin} empties the sampling interval of "
                    f"coordinate {scenario.chart.labels[m]}")
            axes.append(np.linspace(lo2, hi2, per_axis))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    return np.ascontiguousarray(pts)


def direction_pairs(scenario: Scenario, n_points: int, n_pairs: int,
                    seed: int) -> np.ndarray:
    """Seeded direction pairs for the sup-norm plan, one batch per point.

    Raw (unnormalised) directions; consumers normalise in the metric they
    measure with.
    """
    rng = rng_for(seed, _STREAM_DIRECTIONS)
    dirs = rng.standard_normal((n_points, n_pairs, 2, scenario.dim))
    return np.ascontiguousarray(dirs)


def invariance_elements(scenario: Scenario, count: int,
                        seed: int) -> list[GroupElement]:
    rng = rng_for(seed, _STREAM_ELEMENTS)
    return [scenario.group.random_element(rng, scenario.element_scale)
            for _ in range(count)]


def oracle_samples(scenario: Scenario, count: int, seed: int,
                   l_range: tuple[float, float] = (0.05, 5.0)) -> tuple[np.ndarray, np.ndarray]:
    """Seeded (points, deformation parameters) for route-agreement checks."""
    rng = rng_for(seed, _STREAM_ORACLE)
    d = scenario.dim
    pts = np.zeros((count, d))
    for m in range(d):
        lo = scenario.region_lo[m]
        hi = scenario.region_hi[m]
        if not scenario.chart.periodic[m]:
            lo, hi = lo + scenario.sample_margin, hi - scenario.sample_margin
        pts[:, m] = rng.uniform(lo, hi, size=count)
    ls = np.exp(rng.uniform(np.log(l_range[0]), np.log(l_range[1]), size=count))
    return np.ascontiguousarray(pts), ls
