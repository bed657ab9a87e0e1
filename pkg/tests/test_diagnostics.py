import math

import numpy as np
import pytest

from qflow.algebra import eig_sym3, to_components, uniaxial
from qflow.diagnostics import (
    ParabolicPoint,
    bochner_ratio,
    diagnostics_records,
    director_gap,
    energy_density,
    energy_parts,
    harmonic_residual,
    kernel_gradient,
    lift_director,
    limit_residual,
    monotonicity_violation,
    periodic_kernel,
    phi_functional,
    phi_ladder,
    psi_functional,
    psi_ladder,
    scaled_heat_kernel,
    singular_set_scan,
)
from qflow.errors import GapError, KernelDomainError, NeedsSnapshotError, OrientationError
from qflow.fields import DirectorField, Grid, QField
from qflow.manifold import MaterialParams, dist_to_N, s_plus
from qflow.run import simulate
from qflow.solver import (
    SolverConfig,
    constant_director,
    initial_circle_map,
    initial_from_director,
    initial_perturbed_constant,
    max_stable_dt,
)

P = MaterialParams()


def short_run(q0, T=0.01, every=1, p=P):
    return simulate(q0, p, SolverConfig(dt=max_stable_dt(q0.grid, p, "rk2"), T=T, snapshot_every=every))


@pytest.fixture(scope="module")
def constant_run():
    g = Grid.uniform(2, 16)
    return short_run(initial_from_director(constant_director(g, (0.3, 0.4, 0.5)), P), T=0.02)


@pytest.fixture(scope="module")
def smooth_run():
    g = Grid.uniform(2, 32)
    return short_run(initial_from_director(initial_perturbed_constant(g, 0.4, seed=2), P), T=0.04, every=2)


# --- energy -----------------------------------------------------------------


def test_energy_density_examples():
    g = Grid.uniform(2, 8)
    on_n = initial_from_director(constant_director(g), P)
    assert np.abs(energy_density(on_n, P)).max() < 1e-12
    zero = QField(g, np.zeros(g.shape + (5,)))
    unit = P.replace(eps=1.0)
    assert np.allclose(energy_density(zero, unit), 0.4375, rtol=1e-14)


@pytest.mark.parametrize("n", [32, 64, 128])
def test_circle_map_dirichlet_density(n):
    g = Grid.uniform(2, n)
    q = initial_from_director(initial_circle_map(g), P)
    total, e_dir, e_bulk = energy_parts(q, P)
    exact = 0.5 * 1.5**2 * 2 * (2 * math.pi) ** 2
    assert abs(e_dir / exact - 1) < (2 * math.pi / n) ** 2 / 3
    assert total == pytest.approx(e_dir + e_bulk)
    assert e_bulk >= 0.0


def test_records_are_finite(smooth_run):
    recs = diagnostics_records(smooth_run)
    assert len(recs) == len(smooth_run)
    for r in recs:
        assert all(math.isfinite(v) for v in r.as_row())
        assert r.E_bulk >= 0
        assert r.E_total == pytest.approx(r.E_dirichlet + r.E_bulk, rel=1e-14)


# --- kernel -----------------------------------------------------------------


def test_kernel_unit_value():
    z0 = ParabolicPoint((0.1, 0.2, 0.3), 1.0)
    t = 1.0 - 1.0 / (4 * math.pi)
    assert scaled_heat_kernel(np.array([0.1, 0.2, 0.3]), t, z0, P) == pytest.approx(1.0, rel=1e-14)


def test_kernel_domain():
    z0 = ParabolicPoint((0.0, 0.0, 0.0), 1.0)
    with pytest.raises(KernelDomainError):
        scaled_heat_kernel(np.zeros(3), 1.0, z0, P)
    with pytest.raises(KernelDomainError):
        periodic_kernel(Grid.uniform(2, 8), (0.0, 0.0), 0.0, P)


@pytest.mark.parametrize("L1, Gamma", [(1.0, 1.0), (0.5, 2.0), (3.0, 0.7)])
def test_kernel_gradient_identity(L1, Gamma):
    p = P.replace(L1=L1, Gamma=Gamma)
    rng = np.random.default_rng(0)
    z0 = ParabolicPoint((0.0, 0.0, 0.0), 1.0)
    x = rng.normal(scale=0.5, size=(100, 3))
    t = 1.0 - rng.uniform(0.05, 1.0, size=100)
    h = 1e-5
    fd = np.stack(
        [
            (scaled_heat_kernel(x + h * e, t, z0, p) - scaled_heat_kernel(x - h * e, t, z0, p)) / (2 * h)
            for e in np.eye(3)
        ],
        axis=-1,
    )
    exact = kernel_gradient(x, t, z0, p)
    rel = np.linalg.norm(fd - exact, axis=-1) / np.linalg.norm(exact, axis=-1)
    assert rel.max() <= 1e-6


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_periodic_kernel_mass(dim):
    n = {1: 256, 2: 64, 3: 32}[dim]
    g = Grid.uniform(dim, n)
    k = periodic_kernel(g, g.center, 0.002, P)
    assert k.sum() * g.cell_volume == pytest.approx(1.0, abs=1e-8)


def test_periodic_kernel_scaling_with_kappa():
    # integrating the 3-d kernel over all space gives kappa^-3
    p = P.replace(L1=2.0)
    g = Grid.uniform(3, 48)
    k = periodic_kernel(g, g.center, 0.004, p)
    assert k.sum() * g.cell_volume == pytest.approx((p.Gamma / p.L1) ** -3, rel=1e-8)


# --- monotonicity -----------------------------------------------------------


def test_functionals_vanish_on_constant_run(constant_run):
    z0 = ParabolicPoint((0.5, 0.5), 0.02)
    radii = [0.02, 0.04, 0.06]
    assert np.abs(phi_ladder(constant_run, z0, radii)).max() < 1e-10
    assert np.abs(psi_ladder(constant_run, z0, radii)).max() < 1e-10


def test_functionals_nonnegative_and_monotone(smooth_run):
    z0 = ParabolicPoint((0.5, 0.5), 0.036)
    radii = np.linspace(0.2, 0.9, 6) * math.sqrt(0.036) / 2
    phi = phi_ladder(smooth_run, z0, radii)
    psi = psi_ladder(smooth_run, z0, radii)
    assert np.all(phi >= 0) and np.all(psi >= 0)
    assert monotonicity_violation(phi) == 0.0
    assert monotonicity_violation(psi) == 0.0
    radial = psi_ladder(smooth_run, z0, radii, route="radial")
    assert np.max(np.abs(radial - psi) / psi) < 0.02


def test_missing_slice(smooth_run):
    z0 = ParabolicPoint((0.5, 0.5), 0.03)
    with pytest.raises(NeedsSnapshotError) as info:
        phi_functional(smooth_run, z0, 0.2)
    assert info.value.required_time == pytest.approx(0.03 - 0.04)
    with pytest.raises(NeedsSnapshotError):
        psi_functional(smooth_run, z0, 0.1)


def test_snapshot_gap_is_detected():
    g = Grid.uniform(2, 8)
    run = short_run(initial_from_director(initial_circle_map(g), P), T=0.02, every=10**6)
    z0 = ParabolicPoint((0.5, 0.5), 0.02)
    with pytest.raises(NeedsSnapshotError):
        phi_functional(run, z0, 0.05, snap_tol=1e-3)
    with pytest.raises(NeedsSnapshotError):
        psi_functional(run, z0, 0.05, snap_tol=1e-3)


def test_singular_scan(constant_run, smooth_run):
    assert singular_set_scan(constant_run, [0.03, 0.05], eps1=1e-6) == []
    e0 = diagnostics_records(smooth_run)[0].E_total
    assert singular_set_scan(smooth_run, [0.03, 0.05, 0.08], eps1=e0) == []
    every = singular_set_scan(smooth_run, [0.03, 0.05], eps1=0.0)
    assert len(every) == smooth_run.grid.size


# --- bochner ----------------------------------------------------------------


def test_bochner_constant_run_is_zero(constant_run):
    res = bochner_ratio(constant_run)
    assert res.hypothesis_met
    assert np.abs(res.ratio).max() < 1e-6


def test_bochner_hypothesis_report():
    g = Grid.uniform(2, 16)
    run = short_run(initial_from_director(initial_circle_map(g), P), T=0.005)
    res = bochner_ratio(run)
    assert not res.hypothesis_met
    assert res.sup_dist > 0.05 * s_plus(P)
    assert np.isnan(res.ratio[~res.mask]).all()


# --- lifting ----------------------------------------------------------------


def test_lift_round_trip_on_N():
    g = Grid.uniform(2, 24)
    n0 = initial_perturbed_constant(g, 0.6, seed=9)
    n = lift_director(initial_from_director(n0, P), P)
    err = np.minimum(np.abs(n.data - n0.data).max(), np.abs(n.data + n0.data).max())
    assert err < 1e-12
    again = lift_director(initial_from_director(n0, P), P)
    assert np.array_equal(n.data, again.data)


def test_lift_gap_error_lists_cells():
    g = Grid.uniform(2, 4)
    with pytest.raises(GapError) as info:
        lift_director(QField(g, np.zeros(g.shape + (5,))), P)
    assert len(info.value.cells) == g.size


def test_lift_detects_non_orientable_field():
    # director turning by pi across the period: a line field with no continuous orientation
    g = Grid.uniform(1, 32)
    (x,) = g.coordinates()
    n = np.stack([np.cos(np.pi * x), np.sin(np.pi * x), 0 * x], axis=-1)
    with pytest.raises(OrientationError) as info:
        lift_director(initial_from_director(DirectorField(g, n), P), P)
    assert len(info.value.edge) == 2


def test_lift_near_N_tracks_top_eigenvector(smooth_run):
    q = smooth_run.final
    n = lift_director(q, P)
    top = eig_sym3(q.matrices()).vectors[..., :, 0]
    assert np.abs(np.abs(np.sum(n.data * top, axis=-1)) - 1).max() < 1e-12


def test_director_gap_is_sign_invariant():
    g = Grid.uniform(2, 8)
    n = initial_circle_map(g)
    assert director_gap(n, DirectorField(g, -n.data)) == 0.0


# --- residuals --------------------------------------------------------------


def test_limit_residual_vanishes_on_constant(constant_run):
    tang, lam = limit_residual(constant_run.field(0), constant_run.field(1), P)
    assert tang < 1e-12 and np.abs(lam).max() < 1e-10


def test_limit_residual_normal_part_for_circle_map():
    # a stationary circle map: the residual is -(L1/Gamma) lap P, which is normal to N
    g = Grid.uniform(2, 64)
    q = initial_from_director(initial_circle_map(g), P)
    later = QField(g, q.data, 1e-3)
    tang, lam = limit_residual(q, later, P)
    assert tang < 1e-10
    # P = s/2 (I2 + M(2 theta)) in the plane, |M| = sqrt(2); the stencil maps cos(2kx) to
    # -2 (1 - cos 2kh) / h^2 cos(2kx), so |lap P| = sqrt(2) s (1 - cos 2kh) / h^2
    h = 1 / 64
    exact = math.sqrt(2) * s_plus(P) * (1 - math.cos(2 * 2 * math.pi * h)) / h**2
    assert np.allclose(lam, lam.flat[0], rtol=1e-10)
    assert lam.flat[0] == pytest.approx(exact, rel=1e-10)


def test_harmonic_residual_examples():
    g = Grid.uniform(2, 16)
    const = constant_director(g)
    assert harmonic_residual(const, const) == 0.0
    circ = initial_circle_map(g)
    assert harmonic_residual(circ, circ, norm="sup") < 4 * (2 * math.pi / 16) ** 2 * (2 * math.pi) ** 2
