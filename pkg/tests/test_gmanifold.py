"""Orbit geometry: Killing operators, isotropy splits, orbit tensors."""

import numpy as np
import pytest

from cheegerdef.gmanifold import (
    DomainError,
    action_pullback_metric,
    fd_action_jacobian,
    isotropy_split,
    killing_data,
    killing_operator,
    orbit_tensor,
)
from cheegerdef.scenarios import rng_for, sample_grid


def _interior_points(scenario, n=24):
    return sample_grid(scenario, n)


@pytest.mark.parametrize("sid", ["s2_band", "warped_s2", "s3_hopf", "su2_s2", "t2_flat"])
def test_killing_fd_matches_analytic(sid, all_scenarios):
    scenario = {s.scenario_id: s for s in all_scenarios}[sid]
    for x in _interior_points(scenario, 12):
        Ka = killing_operator(scenario, x, mode="analytic")
        Kf = killing_operator(scenario, x, mode="fd")
        np.testing.assert_allclose(Kf, Ka, atol=1e-6)


def test_killing_operator_rejects_bad_mode(s2_band):
    with pytest.raises(ValueError):
        killing_operator(s2_band, np.array([0.3, 0.9]), mode="exact")


@pytest.mark.parametrize("sid", ["s2_band", "warped_s2", "s3_hopf", "su2_s2", "t2_flat"])
def test_orbit_rank_constant_on_chart(sid, all_scenarios):
    scenario = {s.scenario_id: s for s in all_scenarios}[sid]
    rng = rng_for(123, 9)
    lo, hi = scenario.region_lo, scenario.region_hi
    pts = lo + (hi - lo) * rng.random((100, scenario.dim))
    ranks = {killing_data(scenario, x).rank for x in pts}
    assert len(ranks) == 1


@pytest.mark.parametrize("sid", ["s2_band", "warped_s2", "s3_hopf", "su2_s2", "t2_flat"])
def test_isotropy_is_annihilated(sid, all_scenarios):
    scenario = {s.scenario_id: s for s in all_scenarios}[sid]
    for x in _interior_points(scenario, 12):
        kd = killing_data(scenario, x)
        if kd.isotropy_basis.size:
            np.testing.assert_allclose(kd.K @ kd.isotropy_basis, 0.0, atol=1e-12)
        # m-basis and isotropy are mutually orthonormal
        full = np.hstack([kd.m_basis, kd.isotropy_basis]) \
            if kd.isotropy_basis.size else kd.m_basis
        np.testing.assert_allclose(full.T @ full, np.eye(full.shape[1]),
                                   atol=1e-12)


@pytest.mark.parametrize("sid", ["s2_band", "warped_s2", "s3_hopf", "su2_s2", "t2_flat"])
def test_orbit_tensor_is_spd(sid, all_scenarios):
    scenario = {s.scenario_id: s for s in all_scenarios}[sid]
    for x in _interior_points(scenario, 12):
        kd = killing_data(scenario, x)
        P = kd.orbit_tensor
        np.testing.assert_allclose(P, P.T, atol=1e-14)
        assert np.min(np.linalg.eigvalsh(P)) > 0.0


def test_s2_band_orbit_tensor_value(s2_band):
    x = np.array([1.1, 0.8])
    kd = killing_data(s2_band, x)
    assert kd.orbit_tensor[0, 0] == pytest.approx(np.sin(0.8) ** 2, abs=1e-14)


def test_hopf_field_is_unit(s3_hopf):
    for x in _interior_points(s3_hopf, 8):
        kd = killing_data(s3_hopf, x)
        P = kd.orbit_tensor
        assert P.shape == (1, 1)
        assert P[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_su2_orbit_tensor_is_identity(su2_s2):
    for x in _interior_points(su2_s2, 8):
        kd = killing_data(su2_s2, x)
        assert kd.orbit_tensor.shape == (2, 2)
        np.testing.assert_allclose(kd.orbit_tensor, np.eye(2), atol=1e-12)
        assert kd.rank == 2
        assert kd.isotropy_basis.shape == (3, 1)


def test_t2_orbit_tensor_matches_scale():
    from cheegerdef.scenarios import get_scenario
    scenario = get_scenario("t2_flat", orbit_length=1.7)
    x = np.array([2.0, 4.0])
    kd = killing_data(scenario, x)
    assert kd.orbit_tensor[0, 0] == pytest.approx(1.7 ** 2, abs=1e-12)


def test_orbit_tensor_helper_agrees(s2_band):
    x = np.array([0.5, 1.0])
    kd = killing_data(s2_band, x)
    G = s2_band.metric_matrix(x)
    P = orbit_tensor(kd.K, G, kd.m_basis)
    np.testing.assert_allclose(P, kd.orbit_tensor, atol=1e-14)


def test_chart_rejects_outside_point(s2_band):
    with pytest.raises(DomainError):
        killing_data(s2_band, np.array([0.3, 0.05]))
    with pytest.raises(DomainError):
        killing_data(s2_band, np.array([0.3, np.pi - 0.05]))


def test_chart_wrap_periodic(t2_flat):
    x = np.array([2 * np.pi + 0.3, -0.5])
    w = t2_flat.chart.wrap(x)
    assert w[0] == pytest.approx(0.3, abs=1e-12)
    assert w[1] == pytest.approx(2 * np.pi - 0.5, abs=1e-12)


def test_isotropy_split_matches_killing_data(su2_s2):
    x = np.array([1.2, 1.4])
    mb, iso = isotropy_split(su2_s2, x)
    kd = killing_data(su2_s2, x)
    # spans agree: projectors onto the column spaces coincide
    np.testing.assert_allclose(mb @ mb.T, kd.m_basis @ kd.m_basis.T, atol=1e-12)
    np.testing.assert_allclose(iso @ iso.T,
                               kd.isotropy_basis @ kd.isotropy_basis.T,
                               atol=1e-12)


@pytest.mark.parametrize("sid", ["s2_band", "s3_hopf", "su2_s2", "t2_flat"])
def test_fd_jacobian_matches_analytic(sid, all_scenarios):
    scenario = {s.scenario_id: s for s in all_scenarios}[sid]
    rng = rng_for(5, 2)
    for x in _interior_points(scenario, 6):
        g = scenario.group.random_element(rng, angle_scale=scenario.element_scale)
        Ja = scenario.action_jacobian(g, x)
        Jf = fd_action_jacobian(scenario, g, x)
        np.testing.assert_allclose(Jf, Ja, atol=5e-6)


def test_pullback_invariance_of_base_metric(su2_s2):
    rng = rng_for(17, 2)
    x = np.array([1.0, 1.3])
    G = su2_s2.metric_matrix(x)
    for _ in range(10):
        g = su2_s2.group.random_element(rng, angle_scale=0.5)
        pulled = action_pullback_metric(su2_s2, g, su2_s2.metric_matrix, x)
        np.testing.assert_allclose(pulled, G, atol=1e-10)


def test_pullback_rejects_bad_jac_mode(s2_band):
    g = s2_band.group.identity()
    with pytest.raises(ValueError):
        action_pullback_metric(s2_band, g, s2_band.metric_matrix,
                               np.array([0.3, 0.9]), jac_mode="autodiff")
