import math

import numpy as np
import pytest

from qflow.algebra import to_components, to_matrix, uniaxial
from qflow.errors import BlowUpError, InvalidInputError, StabilityError
from qflow.fields import DirectorField, Grid, QField, comp_sq, grad_sq_q, integrate, laplacian
from qflow.manifold import MaterialParams, bulk_force_J, s_plus
from qflow.run import simulate
from qflow.solver import (
    SolverConfig,
    advance,
    bulk_force_components,
    constant_director,
    drift_correct,
    initial_circle_map,
    initial_from_director,
    initial_perturbed_constant,
    max_stable_dt,
    q_flow_rhs,
    solve_harmonic_map,
    step_harmonic_map,
    step_q_flow,
)
from qflow.experiment.verify import laplacian_order, uniform_family_error

P = MaterialParams()


@pytest.mark.parametrize("shape", [(3,), (4, 2), (4, 4, 4, 4)])
def test_grid_rejects_bad_shapes(shape):
    with pytest.raises(InvalidInputError):
        Grid(shape, 1.0)


def test_grid_geometry():
    g = Grid((8, 16), (1.0, 2.0))
    assert g.spacing == (0.125, 0.125)
    assert g.cell_volume == pytest.approx(1 / 64)
    assert g.center == (0.5, 1.0)
    x, y = g.coordinates()
    assert x.shape == (8, 16) and y[0, 1] == 0.125


def test_director_must_be_unit():
    g = Grid.uniform(1, 8)
    with pytest.raises(InvalidInputError):
        DirectorField(g, np.ones((8, 3)))


def test_laplacian_second_order():
    order, errs = laplacian_order()
    assert order > 1.9
    assert errs[-1] / (20 * np.pi**2) < 3e-3


def test_dirichlet_sum_matches_laplacian_pairing():
    rng = np.random.default_rng(0)
    g = Grid.uniform(2, 12, 1.3)
    q = rng.normal(size=g.shape + (5,))
    lhs = integrate(grad_sq_q(q, g), g)
    lap = laplacian(q, g)
    m, ml = to_matrix(q), to_matrix(lap)
    rhs = -np.sum(m * ml) * g.cell_volume
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("n", [32, 64])
def test_circle_map_gradient_density(n):
    g = Grid.uniform(2, n, 1.0)
    q = initial_from_director(initial_circle_map(g), P)
    exact = 2 * 1.5**2 * (2 * np.pi) ** 2
    # |Q(x+h) - Q(x)|^2 = 2 s^2 sin^2(delta) for a director turned by delta = 2 pi h
    delta = 2 * np.pi / n
    discrete = exact * (np.sin(delta) / delta) ** 2
    assert np.allclose(grad_sq_q(q.data, g), discrete, rtol=1e-12)
    assert abs(discrete / exact - 1) < delta**2 / 3


def test_component_force_matches_matrix_force():
    rng = np.random.default_rng(1)
    c = rng.normal(size=(100, 5))
    assert np.allclose(to_matrix(bulk_force_components(c, P)), bulk_force_J(to_matrix(c), P), atol=1e-13)


def test_stability_refusal():
    g = Grid.uniform(2, 32)
    bound = max_stable_dt(g, P, "rk2")
    with pytest.raises(StabilityError):
        step_q_flow(QField(g, np.zeros(g.shape + (5,))), P, SolverConfig(dt=1.01 * bound))
    with pytest.raises(StabilityError):
        SolverConfig(dt=-1.0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blow_up_reports_cell_and_time():
    g = Grid.uniform(1, 8)
    q = QField(g, np.zeros((8, 5)))
    q.data[3, 0] = 1e200
    with pytest.raises(BlowUpError) as info:
        step_q_flow(q, P, SolverConfig(dt=1e-3, scheme="explicit-euler"), check=False)
    assert info.value.cell == (3,)
    assert info.value.time == pytest.approx(1e-3)


def test_uniform_family_matches_ode():
    assert uniform_family_error(P) <= 1e-4
    assert uniform_family_error(P.replace(eps=0.05, a=2.0)) <= 1e-4


@pytest.mark.parametrize("scheme, tol", [("explicit-euler", 2e-2), ("strang-split", 2e-2), ("rk2", 5e-3), ("rk4", 5e-3)])
def test_schemes_agree_on_smooth_data(scheme, tol):
    g = Grid.uniform(2, 16, 1.0)
    q0 = initial_from_director(initial_perturbed_constant(g, 0.3, seed=4), P)
    T = 2e-3
    ref = simulate(q0, P, SolverConfig(dt=max_stable_dt(g, P, "rk4") / 4, scheme="rk4", T=T)).final.data
    got = simulate(q0, P, SolverConfig(dt=max_stable_dt(g, P, "rk4"), scheme=scheme, T=T)).final.data
    assert np.abs(got - ref).max() < tol


def test_fixed_point_on_constant_director():
    g = Grid.uniform(2, 8)
    q0 = initial_from_director(constant_director(g, (1.0, 2.0, 2.0)), P)
    assert np.abs(q_flow_rhs(q0, P)).max() < 1e-13
    out = advance(q0.data, g, P, 1e-3, "rk4")
    assert np.abs(out - q0.data).max() < 1e-15


def test_drift_correction_is_identity_on_components():
    rng = np.random.default_rng(2)
    c = rng.normal(size=(10, 5))
    assert np.allclose(drift_correct(c), c, atol=1e-15)


def test_initial_data_builders():
    g = Grid.uniform(2, 16)
    with pytest.raises(InvalidInputError):
        initial_circle_map(g, m=1.5)
    with pytest.raises(InvalidInputError):
        initial_circle_map(g, axis=2)
    a = initial_perturbed_constant(g, 0.2, seed=11)
    b = initial_perturbed_constant(g, 0.2, seed=11)
    assert np.array_equal(a.data, b.data)
    assert np.abs(np.linalg.norm(a.data, axis=-1) - 1).max() < 1e-12
    q = initial_from_director(a, P)
    assert np.sqrt(comp_sq(q.data)).max() == pytest.approx(math.sqrt(2 / 3) * s_plus(P))


def test_harmonic_flow_keeps_unit_length_and_circle_map():
    g = Grid.uniform(2, 32)
    n0 = initial_circle_map(g)
    n = solve_harmonic_map(n0, 1e-3)
    assert np.abs(np.linalg.norm(n.data, axis=-1) - 1).max() < 1e-14
    assert np.abs(n.data - n0.data).max() < 1e-3


def test_simulate_energy_bookkeeping():
    g = Grid.uniform(2, 16)
    q0 = initial_from_director(initial_perturbed_constant(g, 0.5, seed=1), P)
    run = simulate(q0, P, SolverConfig(dt=max_stable_dt(g, P, "rk2"), T=5e-3, snapshot_every=7))
    assert run.times[-1] == pytest.approx(5e-3)
    assert run.dissipation[0] == 0.0 and np.all(np.diff(run.dissipation) >= 0)
    assert len(run) == len(run.snapshots)


def test_uniaxial_components_helper():
    n = np.array([0.0, 0.0, 1.0])
    assert np.allclose(to_components(uniaxial(1.5, n)), [-0.5, 0, 0, -0.5, 0])


@pytest.mark.parametrize("m", [1, 2])
def test_circle_map_step_is_stationary(m):
    # the discrete residual is parallel to n, so the projection removes it
    g = Grid.uniform(2, 64)
    n0 = initial_circle_map(g, m=m)
    n1 = step_harmonic_map(n0, SolverConfig(dt=g.spacing[0] ** 2 / 8, scheme="explicit-euler"))
    assert np.abs(n1.data - n0.data).max() <= 1e-8
