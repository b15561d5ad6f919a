"""边界条件与入口剖面测试"""
import numpy as np
import pytest

from config.settings import ANNULAR_INFLOW
from core import phase_model as pm
from core.boundary import (InflowBoundary, InflowSpec, OutflowBoundary, OutflowSpec, WallBoundary, WallSpec,
                           build_boundary_conditions, contact_angle_flux, inflow_ghost, inflow_state,
                           layered_concentrations, outflow_ghost, section_quadrature, solve_inflow_profile,
                           superficial_velocities, wall_concentration_flux, wall_ghost)
from utils.errors import ConfigError, InconsistentInflowError


@pytest.fixture
def annular_params():
    return pm.table_params('annular')


def test_layers_partition_unity():
    s = np.linspace(-1.0, 1.0, 41)
    c = layered_concentrations(s, 0.3, -0.3, (2, 1, 3), 0.05)
    np.testing.assert_allclose(c.sum(axis=0), 1.0, atol=1e-15)
    assert c[2, 0] > 0.99 and c[0, 20] > 0.99 and c[2, -1] < 1e-6
    assert c[1, -1] > 0.99


@pytest.mark.parametrize('geometry, weight', [('circular', np.pi / 2), ('planar', 4.0 / 3.0)])
def test_section_quadrature_integrates_shape_factor(geometry, weight):
    quad = section_quadrature(geometry, 1.0)
    assert quad.weights.sum() == pytest.approx(weight, rel=1e-13)


@pytest.mark.parametrize('geometry, ratio', [('circular', 2.0), ('planar', 1.5)])
def test_single_phase_peak_velocity(annular_params, geometry, ratio):
    spec = InflowSpec(superficial=(0.8, 0.0, 0.0), geometry=geometry, radius=1.0, bands=(2, 1, 3))
    solved = solve_inflow_profile(spec, annular_params)
    assert solved.v_max[0] == pytest.approx(ratio * 0.8, rel=1e-10)
    assert solved.pinned['upper'] > 1.0 and solved.pinned['lower'] < -1.0


@pytest.mark.parametrize('jacobian', ['analytic', 'fd'])
def test_annular_profile_reproduces_superficial_velocities(annular_params, jacobian):
    spec = InflowSpec(superficial=ANNULAR_INFLOW['superficial'], slip12=ANNULAR_INFLOW['slip12'],
                      slip23=ANNULAR_INFLOW['slip23'], geometry='circular', radius=1.0)
    solved = solve_inflow_profile(spec, annular_params, jacobian=jacobian)
    V = np.array(solved.v_max)
    assert V[0] - V[1] == pytest.approx(0.0, abs=1e-10)
    assert V[1] - V[2] == pytest.approx(10.0, abs=1e-10)
    assert 10.5 < V[0] < 11.5
    np.testing.assert_allclose(superficial_velocities(solved, annular_params), ANNULAR_INFLOW['superficial'],
                               atol=1e-10)
    upper, lower = solved.interfaces
    assert -1.0 < lower < upper < 1.0


def test_zero_middle_phase_requires_pinned_interfaces(annular_params):
    spec = InflowSpec(superficial=(1.0, 0.0, 1.0))
    with pytest.raises(InconsistentInflowError):
        solve_inflow_profile(spec, annular_params)


@pytest.mark.parametrize('velocities', [(1.0, -0.1, 0.0), (0.0, 0.0, 0.0)])
def test_invalid_superficial_velocities(annular_params, velocities):
    with pytest.raises(InconsistentInflowError):
        solve_inflow_profile(InflowSpec(superficial=velocities), annular_params)


def test_bands_must_be_permutation(annular_params):
    with pytest.raises(ConfigError):
        solve_inflow_profile(InflowSpec(superficial=(1.0, 1.0, 1.0), bands=(1, 1, 3)), annular_params)


def test_given_profile_is_evaluated_directly(channel_params):
    spec = InflowSpec(geometry='planar', radius=0.5, up=(0.0, 1.0, 0.0), bands=(2, 1, 3),
                      v_max=(1.0, 1.0, 1.0), interfaces=(0.3, -0.3))
    assert solve_inflow_profile(spec, channel_params) is spec
    x = np.array([[0.0, 0.0, 0.0], [0.0, 0.5, -0.5], [0.0, 0.0, 0.0]])
    c, u = inflow_state(spec, x, channel_params)
    np.testing.assert_allclose(u[0], [1.0, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(u[1:], 0.0)
    assert c[0, 0] > 0.99
    assert c[1, 1] > 0.99


def test_inflow_ghost_keeps_interior_pressure(channel_params):
    spec = InflowSpec(geometry='planar', radius=0.5, up=(0.0, 1.0, 0.0), v_max=(1.0, 1.0, 1.0),
                      interfaces=(0.3, -0.3))
    q = np.zeros((6, 4))
    q[pm.P] = [1.0, 2.0, 3.0, 4.0]
    x = np.zeros((3, 4))
    x[1] = [-0.4, -0.1, 0.1, 0.4]
    ghost = inflow_ghost(q, x, 0.0, spec, channel_params)
    np.testing.assert_array_equal(ghost[pm.P], q[pm.P])
    rho, _ = pm.mixture(ghost[pm.C1], ghost[pm.C2], channel_params)
    c, u = inflow_state(spec, x, channel_params)
    np.testing.assert_allclose(ghost[pm.MX], rho * u[0])


def test_outflow_and_wall_ghosts():
    q = np.array([0.2, 0.3, 1.0, 2.0, 3.0, 9.0])
    ghost = outflow_ghost(q, OutflowSpec(0.5))
    assert ghost[pm.P] == 0.5
    np.testing.assert_array_equal(ghost[:pm.P], q[:pm.P])
    mirrored = wall_ghost(q, np.array([0.0, 1.0, 0.0]))
    np.testing.assert_allclose(mirrored[pm.MOMENTUM], [1.0, -2.0, 3.0])


def test_contact_angle_flux_value():
    wall = WallSpec.from_degrees(theta13=60.0)
    F = contact_angle_flux(np.array(0.5), np.array(0.0), wall, eps=0.1)
    assert F[0] == pytest.approx(-5.0)
    assert F[1] == pytest.approx(0.0, abs=1e-14)


def test_neutral_wall_has_no_flux():
    F = contact_angle_flux(np.array([0.3, 0.6]), np.array([0.2, 0.1]), WallSpec(), eps=0.05)
    np.testing.assert_allclose(F, 0.0, atol=1e-13)


def test_wall_concentration_flux_uses_contact_angle(channel_params):
    wall = WallSpec.from_degrees(theta12=90.0, theta13=60.0, theta23=60.0)
    C1, C2 = np.array([0.5, 0.2]), np.array([0.1, 0.4])
    C_star, G = wall_concentration_flux(C1, C2, wall, channel_params)
    np.testing.assert_array_equal(C_star, np.stack([C1, C2]))
    np.testing.assert_array_equal(G, contact_angle_flux(C1, C2, wall, channel_params.eps))
    assert np.all(np.abs(G) > 0.0)


def test_wall_angle_equilibrium(two_phase_params):
    WallSpec.from_degrees(60.0, 60.0, 90.0).check_equilibrium(two_phase_params)
    with pytest.raises(ConfigError):
        WallSpec.from_degrees(60.0, 90.0, 90.0).check_equilibrium(two_phase_params)


def test_boundary_gradient_values_and_viscous_flux():
    W = np.arange(6.0)[:, None] * np.ones((6, 2))
    ghost = W + 1.0
    Fn = np.ones((6, 2))
    wall = WallBoundary()
    star = wall.gradient_star(W, ghost, None, None)
    np.testing.assert_array_equal(star[:2], W[:2])
    np.testing.assert_array_equal(star[2:], W[2:] + 0.5)
    np.testing.assert_array_equal(wall.viscous_flux(Fn)[:2], 0.0)
    np.testing.assert_array_equal(wall.viscous_flux(Fn)[2:5], 1.0)
    out = OutflowBoundary(OutflowSpec())
    np.testing.assert_array_equal(out.gradient_star(W, ghost, None, None), W)
    np.testing.assert_array_equal(out.viscous_flux(Fn), 0.0)


def test_build_boundary_conditions(annular_params):
    specs = {'inlet': InflowSpec(superficial=(1.0, 0.0, 0.0), bands=(2, 1, 3)), 'outlet': OutflowSpec(),
             'wall': WallSpec()}
    bcs = build_boundary_conditions(specs, annular_params)
    assert isinstance(bcs['inlet'], InflowBoundary) and bcs['inlet'].spec.solved
    assert bcs['outlet'].kind == 'outflow' and bcs['wall'].kind == 'wall'
    with pytest.raises(ConfigError):
        build_boundary_conditions({'x': object()}, annular_params)
