"""Property suites that a correct build must pass, with a machine-readable report."""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ..algebra import eig_sym3, symmetric_traceless, to_components, uniaxial
from ..errors import UnknownSuiteError
from ..fields import Grid, QField, laplacian
from ..diagnostics.residuals import harmonic_residual
from ..manifold import (
    MaterialParams,
    bulk_force_J,
    decompose_at_N,
    dist_to_N,
    frame_at,
    bulk_ratio_band,
    s_plus,
    scalar_G,
    scalar_H,
    tilde_bulk_energy,
)
from ..run import simulate
from ..solver import SolverConfig, constant_director, harmonic_rhs, initial_circle_map, max_stable_dt, step_harmonic_map


@dataclass
class Check:
    name: str
    samples: int
    worst: float
    threshold: float
    passed: bool
    info: dict | None = None

    @property
    def margin(self):
        return self.threshold - self.worst

    def as_dict(self):
        d = asdict(self)
        d["margin"] = self.margin
        return d


def _le(name, samples, worst, threshold, **info):
    return Check(name, int(samples), float(worst), float(threshold), bool(worst <= threshold), info or None)


def _ge(name, samples, value, threshold, **info):
    # report as "worst <= threshold" by negation so margins keep one sign convention
    return Check(name, int(samples), -float(value), -float(threshold), bool(value >= threshold), info or None)


def random_unit_vectors(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_params(rng, n):
    return [
        MaterialParams(a=rng.uniform(0.2, 3.0), b=rng.uniform(0.2, 3.0), c=rng.uniform(0.2, 3.0))
        for _ in range(n)
    ]


def random_traceless(rng, n, scale=1.0):
    m = rng.normal(size=(n, 3, 3)) * scale
    return symmetric_traceless(m)


def near_N_samples(rng, p, n, rel_radius=0.05):
    """Random ``Q`` with ``0 < dist(Q, N) < rel_radius * s+``."""
    s = s_plus(p)
    base = uniaxial(s, random_unit_vectors(rng, n))
    dirs = random_traceless(rng, n)
    dirs /= np.linalg.norm(dirs, axis=(-2, -1), keepdims=True)
    r = rel_radius * s * rng.uniform(1e-3, 0.999, size=n)
    return base + r[:, None, None] * dirs


# --- suites -----------------------------------------------------------------


def suite_algebra(rng):
    q = random_traceless(rng, 20000, scale=rng.uniform(0.1, 3.0))
    # include exact uniaxial and degenerate-ish inputs
    q = np.concatenate([q, uniaxial(1.3, random_unit_vectors(rng, 2000))])
    eig = eig_sym3(q)
    v = eig.vectors
    eye = np.eye(3)
    ortho = np.abs(np.einsum("...ki,...kj->...ij", v, v) - eye).max()
    scale = np.maximum(np.linalg.norm(q, axis=(-2, -1)), 1.0)
    recon = (np.abs(eig.reconstruct() - q).max(axis=(-2, -1)) / scale).max()
    ordered = np.all(np.diff(eig.values, axis=-1) <= 0.0)
    comp = np.abs(symmetric_traceless(q) - q).max()
    rt = np.abs(to_components(q) - to_components(symmetric_traceless(q))).max()
    return [
        _le("orthonormality defect", len(q), ortho, 1e-12),
        _le("reconstruction error (relative)", len(q), recon, 1e-12),
        _le("eigenvalues descending", len(q), 0.0 if ordered else 1.0, 0.0),
        _le("projection to traceless idempotent", len(q), max(comp, rt), 1e-13),
    ]


def suite_manifold(rng):
    worst_j, worst_f, worst_d, count = 0.0, 0.0, 0.0, 0
    for p in random_params(rng, 5):
        n = random_unit_vectors(rng, 100)
        q = uniaxial(s_plus(p), n)
        worst_j = max(worst_j, np.abs(bulk_force_J(q, p)).max())
        worst_f = max(worst_f, np.abs(tilde_bulk_energy(q, p)).max())
        worst_d = max(worst_d, dist_to_N(q, p).max())
        count += len(n)
    return [
        _le("max entry of J on N", count, worst_j, 1e-12),
        _le("|shifted bulk energy| on N", count, worst_f, 1e-12),
        _le("dist to N on N", count, worst_d, 1e-12),
    ]


def near_N_sample_set(rng, p=None, n=10000):
    p = MaterialParams() if p is None else p
    return p, near_N_samples(rng, p, n)


def suite_normal_force(rng):
    p, q = near_N_sample_set(rng)
    j = bulk_force_J(q, p)
    tang, _ = decompose_at_N(j, frame_at(q))
    tnorm = np.linalg.norm(tang, axis=-1)
    jnorm = np.linalg.norm(j, axis=(-2, -1))
    worst = (tnorm / (1e-10 * (jnorm + 1e-30))).max()
    return [_le("tangent part of J near N / (1e-10 |J|)", len(q), worst, 1.0, max_tangent=float(tnorm.max()))]


def bulk_ratio_scan(p, n=200, g_max=0.01):
    """Ratios ``H / G`` on an ``n x n`` eigenvalue grid around N restricted to ``0 < G <= g_max``."""
    s = s_plus(p)
    half = math.sqrt(g_max)
    x = np.linspace(-s / 3.0 - half, -s / 3.0 + half, n)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    g = scalar_G(xx, yy, p)
    keep = (g > 0.0) & (g <= g_max)
    return scalar_H(xx[keep], yy[keep], p) / g[keep]


def bulk_ratio_validity_radius(p, band, n_dir=720, n_rad=400):
    """Largest ``r`` such that ``H/G`` stays in ``band`` for all eigenvalue pairs with ``dist < r``.

    Only pairs whose third eigenvalue stays the largest are scanned, so that
    ``G`` is the squared distance.
    """
    s = s_plus(p)
    ang = np.linspace(0.0, 2.0 * np.pi, n_dir, endpoint=False)
    radii = np.linspace(1e-4, 2.0 * s, n_rad)
    for r in radii:
        x = -s / 3.0 + r * np.cos(ang) / math.sqrt(2.0)
        y = -s / 3.0 + r * np.sin(ang) / math.sqrt(2.0)
        top = -x - y
        valid = (top >= x) & (top >= y)
        g = scalar_G(x[valid], y[valid], p)
        ratio = scalar_H(x[valid], y[valid], p) / g
        if np.any(ratio < band[0] - 1e-9) or np.any(ratio > band[1] + 1e-9):
            return float(np.sqrt(g.min()))
    return float("inf")


def suite_bulk_ratio(rng):
    p, q = near_N_sample_set(rng)
    lo, hi = bulk_ratio_band(p)
    d = dist_to_N(q, p)
    ratio = np.concatenate([tilde_bulk_energy(q, p) / d**2, bulk_ratio_scan(p)])
    below = max(0.0, lo - ratio.min())
    above = max(0.0, ratio.max() - hi)
    radius = bulk_ratio_validity_radius(p, (lo, hi))
    return [
        _le(
            "ratio outside band",
            ratio.size,
            max(below, above),
            1e-9,
            band=[lo, hi],
            observed=[float(ratio.min()), float(ratio.max())],
            validity_radius=radius,
            validity_radius_rel=radius / s_plus(p),
        )
    ]


def uniform_family_error(p, scheme="rk4", n=8):
    """Worst relative error of a spatially uniform run on ``[0, 10 eps Gamma]`` against a tight ODE solve.

    ``Q = s(t)(e3 e3 - Id/3)`` obeys ``ds/dt = (a s + b s^2/3 - 2c s^3/3) / (eps Gamma)``.
    """
    grid = Grid.uniform(2, n, 1.0)
    s0 = 0.3 * s_plus(p)
    e3 = np.array([0.0, 0.0, 1.0])
    q0 = QField(grid, np.broadcast_to(to_components(uniaxial(s0, e3)), grid.shape + (5,)).copy())
    T = 10.0 * p.eps * p.Gamma
    cfg = SolverConfig(dt=max_stable_dt(grid, p, scheme), scheme=scheme, T=T)
    run = simulate(q0, p, cfg)
    s_num = np.array([-3.0 * snap[0, 0, 0] for snap in run.snapshots])  # Q11 = -s/3
    rhs = lambda t, s: (p.a * s + p.b * s * s / 3.0 - 2.0 * p.c * s**3 / 3.0) / (p.eps * p.Gamma)
    ref = solve_ivp(rhs, (0.0, T), [s0], t_eval=np.clip(run.times, 0.0, T), rtol=1e-12, atol=1e-14).y[0]
    return float(np.max(np.abs(s_num - ref) / np.abs(ref)))


def laplacian_order(ns=(16, 32, 64)):
    errs = []
    for n in ns:
        g = Grid.uniform(2, n, 1.0)
        x, y = g.coordinates()
        f = np.sin(2 * np.pi * x) * np.cos(4 * np.pi * y)
        exact = -(4 + 16) * np.pi**2 * f
        errs.append(np.abs(laplacian(f, g) - exact).max())
    return float(np.log2(errs[-2] / errs[-1])), errs


def suite_solver(rng):
    p = MaterialParams()
    err = uniform_family_error(p)
    order, _ = laplacian_order()
    return [
        _le("uniform family vs ODE oracle (relative)", 1, err, 1e-4),
        _ge("Laplacian convergence order", 3, order, 1.9),
    ]


def circle_residual_order(ns=(32, 64, 128)):
    res = []
    for n in ns:
        g = Grid.uniform(2, n, 1.0)
        nf = initial_circle_map(g)
        res.append(harmonic_residual(nf, nf, norm="sup"))
    orders = [math.log2(res[i] / res[i + 1]) for i in range(len(res) - 1)]
    return min(orders), res


def suite_harmonic(rng):
    order, res = circle_residual_order()
    g = Grid.uniform(2, 32, 1.0)
    const = constant_director(g, rng.normal(size=3))
    step = step_harmonic_map(const, SolverConfig(dt=1e-4, scheme="explicit-euler"))
    moved = float(np.abs(step.data - const.data).max())
    rhs = float(np.abs(harmonic_rhs(const.data, g)).max())
    return [
        _le("constant field right-hand side", 1, rhs, 0.0),
        _ge("circle map residual order", len(res), order, 1.9, residuals=res),
        _le("constant field motion after one step", 1, moved, 0.0),
    ]


SUITES = {
    "algebra": suite_algebra,
    "manifold": suite_manifold,
    "normal_force": suite_normal_force,
    "lemma24": suite_bulk_ratio,
    "solver": suite_solver,
    "harmonic": suite_harmonic,
}


def run_suites(name="all", seed=0):
    """``{suite: {"passed": bool, "checks": [...]}}`` for one suite or ``"all"``."""
    if name != "all" and name not in SUITES:
        raise UnknownSuiteError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    names = list(SUITES) if name == "all" else [name]
    report = {}
    for nm in names:
        checks = SUITES[nm](np.random.default_rng(seed))
        report[nm] = {"passed": all(c.passed for c in checks), "checks": [c.as_dict() for c in checks]}
    return report
