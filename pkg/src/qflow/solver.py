"""Time stepping of the relaxed Q-tensor flow and the harmonic map heat flow.

The Q-flow is

    dQ/dt = -J(Q) / (eps Gamma) + (L1 / Gamma) lap Q

and the harmonic map flow, in unit-speed form,

    dn/dt = lap n + |grad n|^2 n,   |n| = 1.

Fields live on periodic grids; diffusion is explicit.
"""

import math
from dataclasses import dataclass

import numpy as np

from .algebra import symmetric_traceless, to_components, to_matrix, uniaxial
from .errors import BlowUpError, InvalidInputError, StabilityError
from .fields import DirectorField, QField, central_diff, laplacian
from .manifold import lipschitz_bound_J, s_plus

SCHEMES = ("explicit-euler", "rk2", "rk4", "strang-split")
SAFETY = 0.9


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    scheme: str = "rk2"
    T: float = 0.1
    snapshot_every: int = 1
    drift_correction: bool = False

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise StabilityError(f"time step must be positive, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise InvalidInputError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.snapshot_every < 1:
            raise InvalidInputError("snapshot_every must be >= 1")

    @property
    def n_steps(self):
        return max(1, int(math.ceil(self.T / self.dt - 1e-9)))


def kappa_bulk(p, margin=0.05):
    """Lipschitz bound of J on the invariant ball ``|Q| <= sqrt(2/3) s+ (1 + margin)``."""
    radius = math.sqrt(2.0 / 3.0) * s_plus(p) * (1.0 + margin)
    return lipschitz_bound_J(p, radius)


def diffusion_dt_bound(grid, diffusivity):
    h2 = min(grid.spacing) ** 2
    return SAFETY * h2 / (2.0 * grid.dim * diffusivity)


def max_stable_dt(grid, p, scheme):
    """Largest admissible step for the Q-flow under ``scheme``."""
    bound = diffusion_dt_bound(grid, p.L1 / p.Gamma)
    if scheme != "strang-split":
        bound = min(bound, SAFETY * p.eps * p.Gamma / kappa_bulk(p))
    return bound


def check_stability(grid, p, cfg):
    bound = max_stable_dt(grid, p, cfg.scheme)
    if cfg.dt > bound * (1.0 + 1e-12):
        raise StabilityError(f"dt={cfg.dt:.6g} exceeds the stability bound {bound:.6g} for scheme {cfg.scheme}")


# --- right-hand sides -------------------------------------------------------


def bulk_force_components(q, p):
    """J(Q) evaluated directly on ``(..., 5)`` components."""
    q11, q12, q13, q22, q23 = (q[..., k] for k in range(5))
    q33 = -(q11 + q22)
    n2 = q11 * q11 + q22 * q22 + q33 * q33 + 2.0 * (q12 * q12 + q13 * q13 + q23 * q23)
    sq = (
        q11 * q11 + q12 * q12 + q13 * q13,
        q11 * q12 + q12 * q22 + q13 * q23,
        q11 * q13 + q12 * q23 + q13 * q33,
        q12 * q12 + q22 * q22 + q23 * q23,
        q12 * q13 + q22 * q23 + q23 * q33,
    )
    lin = p.c * n2 - p.a
    iso = p.b / 3.0 * n2
    out = np.empty_like(q)
    out[..., 0] = lin * q11 - p.b * sq[0] + iso
    out[..., 1] = lin * q12 - p.b * sq[1]
    out[..., 2] = lin * q13 - p.b * sq[2]
    out[..., 3] = lin * q22 - p.b * sq[3] + iso
    out[..., 4] = lin * q23 - p.b * sq[4]
    return out


def bulk_rhs(comps, p):
    return bulk_force_components(comps, p) * (-1.0 / (p.eps * p.Gamma))


def q_flow_rhs(q, p, grid=None):
    """``-J(Q)/(eps Gamma) + (L1/Gamma) lap Q`` cellwise, as components."""
    if isinstance(q, QField):
        grid, comps = q.grid, q.data
    else:
        comps = np.asarray(q, dtype=float)
    return bulk_rhs(comps, p) + (p.L1 / p.Gamma) * laplacian(comps, grid)


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _bulk_substeps(p, dt):
    # RK4 substeps well inside the bulk stiffness scale
    limit = 0.5 * p.eps * p.Gamma / kappa_bulk(p)
    return max(1, int(math.ceil(abs(dt) / limit)))


def _bulk_ode(comps, p, dt):
    n = _bulk_substeps(p, dt)
    sub = dt / n
    y = comps
    for _ in range(n):
        y = _rk4(lambda z: bulk_rhs(z, p), y, sub)
    return y


def advance(comps, grid, p, dt, scheme):
    """One step of the Q-flow on raw component arrays."""
    f = lambda z: q_flow_rhs(z, p, grid)
    if scheme == "explicit-euler":
        return comps + dt * f(comps)
    if scheme == "rk2":
        k1 = f(comps)
        k2 = f(comps + dt * k1)
        return comps + 0.5 * dt * (k1 + k2)
    if scheme == "rk4":
        return _rk4(f, comps, dt)
    if scheme == "strang-split":
        y = _bulk_ode(comps, p, 0.5 * dt)
        y = y + dt * (p.L1 / p.Gamma) * laplacian(y, grid)
        return _bulk_ode(y, p, 0.5 * dt)
    raise InvalidInputError(f"unknown scheme {scheme!r}")


def _check_finite(values, t):
    finite = np.isfinite(values)
    if not np.all(finite):
        cell = tuple(int(i) for i in np.argwhere(~finite)[0][:-1])
        raise BlowUpError(f"non-finite value at cell {cell}, t={t:.6g}", cell=cell, time=t)


def step_q_flow(field, p, cfg, check=True):
    """Advance a :class:`QField` by ``cfg.dt``."""
    if check:
        check_stability(field.grid, p, cfg)
    new = advance(field.data, field.grid, p, cfg.dt, cfg.scheme)
    t = field.t + cfg.dt
    _check_finite(new, t)
    if cfg.drift_correction:
        new = drift_correct(new)
    return QField(field.grid, new, t)


def drift_correct(comps):
    """Re-symmetrise and re-detrace each cell.

    The five-component storage already enforces both constraints, so this is
    a round trip through the full matrices kept for configuration parity.
    """
    return to_components(symmetric_traceless(to_matrix(comps)))


# --- harmonic map heat flow -------------------------------------------------


def harmonic_rhs(n, grid):
    """``lap n + |grad n|^2 n`` with central-difference gradients."""
    g = central_diff(n, grid)
    grad_sq = np.sum(g * g, axis=(-2, -1))
    return laplacian(n, grid) + grad_sq[..., None] * n


def harmonic_dt_bound(grid, diffusivity=1.0):
    return diffusion_dt_bound(grid, diffusivity)


def step_harmonic_map(field, cfg, diffusivity=1.0, check=True):
    """Projected explicit Euler step; ``diffusivity`` rescales time (use L1/Gamma to match the Q-flow)."""
    if check:
        bound = harmonic_dt_bound(field.grid, diffusivity)
        if cfg.dt > bound * (1.0 + 1e-12):
            raise StabilityError(f"dt={cfg.dt:.6g} exceeds the harmonic map bound {bound:.6g}")
    n = field.data
    velocity = harmonic_rhs(n, field.grid)
    m = n + cfg.dt * diffusivity * velocity
    t = field.t + cfg.dt
    _check_finite(m, t)
    # cells at rest keep their bits: renormalising would drift them by an ulp
    moving = np.any(velocity != 0.0, axis=-1, keepdims=True)
    m = np.where(moving, m / np.linalg.norm(m, axis=-1, keepdims=True), n)
    return DirectorField(field.grid, m, t, check=False)


def solve_harmonic_map(n0, T, dt=None, diffusivity=1.0):
    """Integrate the harmonic map flow to time ``T`` with a uniform step <= ``dt``."""
    bound = harmonic_dt_bound(n0.grid, diffusivity)
    dt = bound if dt is None else dt
    steps = max(1, int(math.ceil(T / dt - 1e-9)))
    cfg = SolverConfig(dt=T / steps, scheme="explicit-euler", T=T)
    n = n0
    for _ in range(steps):
        n = step_harmonic_map(n, cfg, diffusivity)
    return n


# --- initial data -----------------------------------------------------------


def initial_from_director(n_field, p):
    """``Q0 = s+ (n0 n0 - Id/3)`` cellwise."""
    n = n_field.data
    dev = np.abs(np.linalg.norm(n, axis=-1) - 1.0)
    if not np.all(dev <= 1e-12):
        raise InvalidInputError(f"director is not unit length (max deviation {dev.max():.3e})")
    return QField(n_field.grid, to_components(uniaxial(s_plus(p), n)), n_field.t)


def initial_circle_map(grid, m=1, axis=0):
    """``n = (cos k x, sin k x, 0)`` with ``k = 2 pi m / L`` along ``axis``."""
    if int(m) != m:
        raise InvalidInputError(f"winding number must be an integer, got {m}")
    if not 0 <= axis < grid.dim:
        raise InvalidInputError(f"axis {axis} out of range for a {grid.dim}-d grid")
    x = grid.coordinates()[axis]
    theta = 2.0 * np.pi * int(m) * x / grid.lengths[axis]
    n = np.stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)], axis=-1)
    return DirectorField(grid, n)


def constant_director(grid, direction=(0.0, 0.0, 1.0)):
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return DirectorField(grid, np.broadcast_to(d, grid.shape + (3,)).copy())


def smooth_random_field(grid, seed, modes=2):
    """Periodic random vector field built from Fourier modes ``|k_i| <= modes``, unit RMS."""
    rng = np.random.default_rng(seed)
    coords = grid.coordinates()
    out = np.zeros(grid.shape + (3,))
    ks = np.array(np.meshgrid(*[np.arange(-modes, modes + 1)] * grid.dim, indexing="ij")).reshape(grid.dim, -1).T
    for k in ks:
        if not np.any(k):
            continue
        phase = sum(2.0 * np.pi * ki * x / L for ki, x, L in zip(k, coords, grid.lengths))
        amp = rng.normal(size=(2, 3)) / (1.0 + float(np.dot(k, k)))
        out += np.cos(phase)[..., None] * amp[0] + np.sin(phase)[..., None] * amp[1]
    rms = np.sqrt(np.mean(np.sum(out * out, axis=-1)))
    return out / rms if rms > 0 else out


def perturb_director(n_field, amplitude, seed, modes=2):
    """Add a smooth periodic random perturbation of RMS ``amplitude`` and renormalise."""
    if amplitude == 0.0:
        return DirectorField(n_field.grid, n_field.data.copy(), n_field.t)
    m = n_field.data + amplitude * smooth_random_field(n_field.grid, seed, modes)
    norms = np.linalg.norm(m, axis=-1, keepdims=True)
    if np.any(norms < 1e-8):
        raise InvalidInputError("perturbation cancels the director somewhere; lower the amplitude")
    return DirectorField(n_field.grid, m / norms, n_field.t)


def initial_perturbed_constant(grid, amplitude, seed, direction=(0.0, 0.0, 1.0), modes=2):
    return perturb_director(constant_director(grid, direction), amplitude, seed, modes)
