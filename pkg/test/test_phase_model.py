"""物性参数、自由能与点态通量测试"""
import numpy as np
import pytest

from core import phase_model as pm
from utils.errors import ConfigError, NonphysicalDensityError, SingularSpreadingFactorError


def test_spreading_factors(three_phase_params):
    p = three_phase_params
    np.testing.assert_allclose(p.Sigma, [5.336e-3, 7.136e-3, 9.194e-3], rtol=1e-12)
    assert 3.0 / p.SigmaT == pytest.approx(np.sum(1.0 / p.Sigma), rel=1e-14)
    assert p.rho0 == 3.0
    assert p.c0_squared == pytest.approx(1.0e3)
    assert p.sound_factor == pytest.approx(3.0e3)


def test_zero_spreading_factor_is_rejected():
    with pytest.raises(SingularSpreadingFactorError):
        pm.derive_params(rho=(1, 1, 1), eta=(1, 1, 1), sigma12=1.0, sigma13=1.0, sigma23=2.0, eps=0.1, M0=1.0,
                         c0=1.0)


@pytest.mark.parametrize('override', [{'eps': 0.0}, {'rho': (1.0, -1.0, 2.0)}, {'mobility': -1.0}])
def test_nonpositive_inputs_are_rejected(override):
    with pytest.raises(ConfigError):
        pm.table_params('mms_three_phase', **override)


def test_sound_speed_given_twice_is_rejected():
    with pytest.raises(ConfigError):
        pm.table_params('mms_three_phase', c0=10.0)


def test_unknown_table():
    with pytest.raises(ConfigError):
        pm.table_params('no_such_table')


def test_mixture_is_linear(three_phase_params):
    rho, eta = pm.mixture(np.array([1.0, 0.0, 0.2]), np.array([0.0, 1.0, 0.3]), three_phase_params)
    np.testing.assert_allclose(rho, [1.0, 3.0, 0.2 + 0.9 + 1.0])
    np.testing.assert_allclose(eta, 1.0e-3)


def test_free_energy_derivatives_match_differences(three_phase_params):
    p = three_phase_params
    c = np.array([0.3, 0.25, 0.45])
    d = pm.free_energy_derivatives(*c, p)
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (pm.free_energy(*(c + e), p) - pm.free_energy(*(c - e), p)) / (2 * h)
        assert d[i] == pytest.approx(fd, rel=1e-7, abs=1e-14)


def test_bulk_potentials_sum_to_zero(three_phase_params):
    rng = np.random.default_rng(1)
    c1, c2 = rng.uniform(0.0, 0.5, size=(2, 20))
    f = pm.bulk_potential(c1, c2, 1.0 - c1 - c2, three_phase_params)
    np.testing.assert_allclose(f[0] + f[1] + f[2], 0.0, atol=1e-15)


def test_third_potential_from_constraint(three_phase_params):
    p = three_phase_params
    rng = np.random.default_rng(2)
    c1, c2 = rng.uniform(0.0, 0.5, size=(2, 10))
    l1, l2 = rng.normal(size=(2, 10))
    w = pm.scaled_potentials(c1, c2, l1, l2, p)
    mu = pm.potentials_from_scaled(w, p)
    direct = pm.chemical_potential_pointwise(np.stack([c1, c2, 1 - c1 - c2]), np.stack([l1, l2, -l1 - l2]), p)
    np.testing.assert_allclose(mu, direct, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(np.sum(mu / p.Sigma[:, None], axis=0), 0.0, atol=1e-13)


def test_reduced_mobility_with_equal_tensions(two_phase_params):
    assert pm.reduced_mobility(two_phase_params) == pytest.approx(two_phase_params.M0 / 2.0)


def test_nonphysical_density_reports_location(three_phase_params):
    q = np.zeros((6, 2, 2, 2, 2))
    q[pm.C1] = 0.5
    q[pm.C1, 1, 0, 1, 1] = 3.0
    with pytest.raises(NonphysicalDensityError) as info:
        pm.recover_velocity(q, three_phase_params)
    assert info.value.element == 1
    assert tuple(int(i) for i in info.value.node) == (0, 1, 1)
    assert info.value.value == pytest.approx(-1.0)


def test_density_floor_clips(three_phase_params):
    from dataclasses import replace
    p = replace(three_phase_params, density_floor=0.1)
    q = np.zeros((6, 3))
    q[pm.C1] = [3.0, 0.0, 1.0]
    rho, _ = pm.recover_velocity(q, p)
    np.testing.assert_allclose(rho, [0.1, 2.0, 1.0])


def test_inviscid_flux_structure(three_phase_params):
    q = np.array([0.2, 0.3, 1.0, 2.0, 3.0, 5.0])
    rho = 0.2 + 0.9 + 1.0
    F = pm.inviscid_flux(q, three_phase_params)
    u = q[2:5] / rho
    np.testing.assert_allclose(F[pm.C1], 0.2 * u)
    np.testing.assert_allclose(F[pm.MX:pm.MZ + 1], np.outer(q[2:5], u) + 5.0 * np.eye(3))
    np.testing.assert_allclose(F[pm.P], 3.0e3 * u)


def test_viscous_stress_is_symmetric(three_phase_params):
    rng = np.random.default_rng(3)
    q = np.array([0.3, 0.3, 0.1, -0.2, 0.4, 0.0])
    grad_w = rng.normal(size=(6, 3))
    grad_c = rng.normal(size=(2, 3))
    F = pm.viscous_flux(q, grad_w, three_phase_params, grad_c)
    stress = F[pm.MOMENTUM]
    np.testing.assert_allclose(stress, stress.T, atol=1e-18)
    np.testing.assert_allclose(F[pm.C1], three_phase_params.M0 * grad_w[pm.C1])
    assert np.all(F[pm.P] == 0.0)


def test_source_term_gravity_and_capillary(channel_params):
    q = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    grad_c = np.zeros((2, 3))
    grad_c[0, 0] = 2.0
    mu = np.array([1.0, 0.0, 0.5])
    s = pm.source_term(q, grad_c, mu, channel_params)
    np.testing.assert_allclose(s[pm.MOMENTUM], [(1.0 - 0.5) * 2.0, -1.0, 0.0])
    assert s[pm.C1] == 0.0 and s[pm.P] == 0.0
