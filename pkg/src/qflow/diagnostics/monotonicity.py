"""Heat-kernel weighted energies on backward parabolic slices and slabs.

With ``kappa = Gamma / L1`` and ``tau = t0 - t > 0`` the scaled backward kernel
centred at ``z0 = (x0, t0)`` is

    G(x, t) = (4 pi kappa tau)^(-3/2) exp(-kappa |x - x0|^2 / (4 tau)).

On 1-D and 2-D grids the field is read as constant along the missing axes,
so the kernel is replaced by its integral over them. On the torus the
Gaussian is summed over periodic images.

    Phi(R) = R^2 int e(x, t0 - R^2) G dx
    Psi(R) = int_{t0-4R^2}^{t0-R^2} int e G dx dt
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError, KernelDomainError, NeedsSnapshotError
from .energy import energy_density

IMAGE_TAIL = 1e-12


@dataclass(frozen=True)
class ParabolicPoint:
    """Space-time point ``(x0, t0)``; ``x0`` has one entry per grid axis."""

    x0: tuple
    t0: float

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))
        object.__setattr__(self, "t0", float(self.t0))

    def padded(self):
        """``x0`` padded with zeros to three coordinates."""
        return self.x0 + (0.0,) * (3 - len(self.x0))


def _kappa(p):
    return p.Gamma / p.L1


def scaled_heat_kernel(x, t, z0, p):
    """Backward kernel in full 3-D space, no periodisation.

    ``x`` has shape ``(..., 3)``. Raises :class:`KernelDomainError` unless
    ``t < t0``.
    """
    tau = z0.t0 - np.asarray(t, dtype=float)
    if np.any(tau <= 0.0):
        raise KernelDomainError(f"kernel needs t < t0 = {z0.t0}")
    k = _kappa(p)
    dx = np.asarray(x, dtype=float) - np.asarray(z0.padded())
    r2 = np.sum(dx * dx, axis=-1)
    return (4.0 * math.pi * k * tau) ** -1.5 * np.exp(-k * r2 / (4.0 * tau))


def kernel_gradient(x, t, z0, p):
    """Closed form ``(kappa / 2) (x - x0) / (t - t0) G``."""
    g = scaled_heat_kernel(x, t, z0, p)
    dx = np.asarray(x, dtype=float) - np.asarray(z0.padded())
    return 0.5 * _kappa(p) * dx / (np.asarray(t) - z0.t0)[..., None] * g[..., None]


def _axis_images(offsets, length, kappa, tau):
    """``sum_k exp(-kappa (d + k L)^2 / (4 tau))`` for minimal-image offsets ``d``."""
    total = np.exp(-kappa * offsets**2 / (4.0 * tau))
    k = 1
    while True:
        nearest = (k - 0.5) * length
        if math.exp(-kappa * nearest * nearest / (4.0 * tau)) < IMAGE_TAIL:
            break
        total = total + np.exp(-kappa * (offsets + k * length) ** 2 / (4.0 * tau))
        total = total + np.exp(-kappa * (offsets - k * length) ** 2 / (4.0 * tau))
        k += 1
    return total


def periodic_kernel(grid, x0, tau, p):
    """Kernel sampled at the cell positions of ``grid`` with periodic images.

    Missing dimensions are integrated out, giving the prefactor
    ``(4 pi tau)^(-d/2) kappa^((d-6)/2)``.
    """
    if tau <= 0.0:
        raise KernelDomainError(f"kernel needs t < t0 (got t0 - t = {tau})")
    k = _kappa(p)
    d = grid.dim
    pref = (4.0 * math.pi * tau) ** (-d / 2.0) * k ** ((d - 6) / 2.0)
    out = np.full(grid.shape, pref)
    for ax, (n, h, L) in enumerate(zip(grid.shape, grid.spacing, grid.lengths)):
        pos = np.arange(n) * h - x0[ax]
        pos = pos - L * np.round(pos / L)
        factor = _axis_images(pos, L, k, tau)
        shape = [1] * d
        shape[ax] = n
        out = out * factor.reshape(shape)
    return out


def _weighted_energy(run, k, z0, p, cache):
    key = (k, z0)
    if key not in cache:
        tau = z0.t0 - run.times[k]
        e = energy_density(run.snapshots[k], p, run.grid)
        g = periodic_kernel(run.grid, z0.x0, tau, p)
        cache[key] = float(np.sum(e * g) * run.grid.cell_volume)
    return cache[key]


def _check_point(run, z0):
    if len(z0.x0) != run.grid.dim:
        raise InvalidInputError(f"x0 has {len(z0.x0)} coordinates for a {run.grid.dim}-d grid")
    if not run.times[0] < z0.t0 <= run.times[-1] + 1e-12:
        raise InvalidInputError(f"t0 = {z0.t0} lies outside the simulated interval")


def _tolerance(run, snap_tol=None):
    """Largest admissible distance between a requested and a stored time (default: one snapshot interval)."""
    return max(run.snapshot_interval, 1e-300) if snap_tol is None else snap_tol


def _nearest_before(run, t, t0):
    """Snapshot closest to ``t`` among those strictly before ``t0``."""
    times = np.asarray(run.times)
    cand = np.nonzero(times < t0)[0]
    if cand.size == 0:
        return None, None
    k = int(cand[np.argmin(np.abs(times[cand] - t))])
    return k, float(times[k])


def phi_functional(run, z0, R, p=None, cache=None, snap_tol=None):
    """``Phi`` on the snapshot nearest to ``t0 - R^2``.

    The slice is evaluated at its actual time, i.e. with the effective
    radius ``sqrt(t0 - t_snap)``. A slice further than one snapshot interval
    from the requested time raises :class:`NeedsSnapshotError`.
    """
    p = run.params if p is None else p
    cache = {} if cache is None else cache
    _check_point(run, z0)
    want = z0.t0 - R * R
    k, t = _nearest_before(run, want, z0.t0)
    if k is None or abs(t - want) > _tolerance(run, snap_tol):
        raise NeedsSnapshotError(f"no snapshot near t = {want:.6g}", required_time=want)
    return (z0.t0 - t) * _weighted_energy(run, k, z0, p, cache)


def _endpoint(times, te, t0, tol):
    """Interpolation weights ``{k: c}`` for the value at time ``te``."""
    before = np.nonzero(times <= te)[0]
    after = np.nonzero((times >= te) & (times < t0))[0]
    ka = int(before[-1]) if before.size else None
    kb = int(after[0]) if after.size else None
    if ka is not None and kb is not None and times[kb] - times[ka] <= 2.0 * tol:
        if ka == kb or times[kb] == times[ka]:
            return {ka: 1.0}
        w = (te - times[ka]) / (times[kb] - times[ka])
        return {ka: 1.0 - w, kb: w}
    k = ka if ka is not None else kb
    if k is None or abs(times[k] - te) > tol:
        raise NeedsSnapshotError(f"no snapshot near t = {te:.6g}", required_time=te)
    return {k: 1.0}


def _slab_nodes(run, t0, R, snap_tol=None):
    """Quadrature nodes ``(t, {k: c})`` covering ``[t0 - 4R^2, t0 - R^2]``.

    Interior nodes are the stored snapshots; the two ends are linearly
    interpolated between the snapshots that bracket them.
    """
    lo, hi = t0 - 4.0 * R * R, t0 - R * R
    times = np.asarray(run.times)
    tol = _tolerance(run, snap_tol)
    nodes = [(lo, _endpoint(times, lo, t0, tol))]
    nodes += [(float(times[k]), {int(k): 1.0}) for k in np.nonzero((times > lo) & (times < hi))[0]]
    nodes.append((hi, _endpoint(times, hi, t0, tol)))
    return nodes


def psi_functional(run, z0, R, p=None, route="slab", cache=None, snap_tol=None):
    """``Psi`` by trapezoidal quadrature over the snapshots inside the slab.

    ``route="slab"`` integrates in ``t``; ``route="radial"`` uses
    ``Psi = 2 int r^-1 Phi(r) dr`` with ``r = sqrt(t0 - t)`` at the same
    snapshots, which is an independent quadrature of the same quantity.
    """
    p = run.params if p is None else p
    cache = {} if cache is None else cache
    _check_point(run, z0)
    nodes = _slab_nodes(run, z0.t0, R, snap_tol)
    times = np.array([t for t, _ in nodes])
    vals = np.array([sum(c * _weighted_energy(run, k, z0, p, cache) for k, c in w.items()) for _, w in nodes])
    if route == "slab":
        return float(np.trapezoid(vals, times))
    if route == "radial":
        r = np.sqrt(z0.t0 - times)
        # 2 Phi(r) / r = 2 r I(t0 - r^2); r decreases as t increases
        return float(-np.trapezoid(2.0 * r * vals, r))
    raise InvalidInputError(f"route must be 'slab' or 'radial', got {route!r}")


def phi_ladder(run, z0, radii, p=None):
    cache = {}
    return np.array([phi_functional(run, z0, R, p, cache=cache) for R in radii])


def psi_ladder(run, z0, radii, p=None, route="slab"):
    cache = {}
    return np.array([psi_functional(run, z0, R, p, route=route, cache=cache) for R in radii])


def phi_snap_tolerance(run, z0, radii, p=None):
    """Per-radius bound on the error from snapping ``t0 - R^2`` to a snapshot.

    Half a snapshot interval times the local rate of change of ``Phi``,
    estimated by differencing against the neighbouring snapshots.
    """
    p = run.params if p is None else p
    cache = {}
    out = []
    for R in radii:
        k, _ = _nearest_before(run, z0.t0 - R * R, z0.t0)
        here = (z0.t0 - run.times[k]) * _weighted_energy(run, k, z0, p, cache)
        diffs = [0.0]
        for j in (k - 1, k + 1):
            if 0 <= j < len(run) and run.times[j] < z0.t0:
                there = (z0.t0 - run.times[j]) * _weighted_energy(run, j, z0, p, cache)
                diffs.append(abs(there - here))
        out.append(0.5 * max(diffs))
    return np.array(out)


def monotonicity_violation(values, rel_tol=1e-3, abs_tol=1e-10, slack=None):
    """Largest drop ``v[i] - v[i+1]`` beyond tolerance along an increasing ladder (0 if monotone)."""
    v = np.asarray(values, dtype=float)
    s = np.zeros_like(v) if slack is None else np.asarray(slack, dtype=float)
    worst = 0.0
    for i in range(v.size - 1):
        allowed = rel_tol * v[i + 1] + abs_tol + s[i] + s[i + 1]
        worst = max(worst, v[i] - v[i + 1] - allowed)
    return worst


def raw_drops(values):
    """Largest raw decrease along the ladder, without tolerance (0 if non-decreasing)."""
    v = np.asarray(values, dtype=float)
    return float(max(0.0, np.max(v[:-1] - v[1:]))) if v.size > 1 else 0.0


def slab_energy_field(run, t0, R, p=None):
    """Slab integral of ``e G`` for every grid point as centre, by FFT convolution."""
    p = run.params if p is None else p
    grid = run.grid
    nodes = _slab_nodes(run, t0, R)
    times = np.array([t for t, _ in nodes])
    dt = np.diff(times)
    node_w = np.zeros(len(nodes))
    node_w[:-1] += 0.5 * dt
    node_w[1:] += 0.5 * dt
    weights = {}
    for wn, (_, combo) in zip(node_w, nodes):
        for k, c in combo.items():
            weights[k] = weights.get(k, 0.0) + wn * c
    acc = np.zeros(grid.shape)
    origin = tuple(0.0 for _ in range(grid.dim))
    axes = tuple(range(grid.dim))
    for k, w in sorted(weights.items()):
        e = energy_density(run.snapshots[k], p, grid)
        g = periodic_kernel(grid, origin, t0 - run.times[k], p)
        # the kernel is even, so correlation equals convolution
        conv = np.fft.irfftn(np.fft.rfftn(e, axes=axes) * np.fft.rfftn(g, axes=axes), s=grid.shape, axes=axes)
        acc += w * conv * grid.cell_volume
    return np.maximum(acc, 0.0)


def singular_set_scan(run, radii, eps1, p=None, t0=None):
    """Grid points ``x0`` whose slab energy at ``(x0, t0)`` is ``>= eps1`` for every radius.

    ``t0`` defaults to the final snapshot time.
    """
    t0 = run.times[-1] if t0 is None else t0
    flagged = np.ones(run.grid.shape, dtype=bool)
    for R in radii:
        flagged &= slab_energy_field(run, t0, R, p) >= eps1
    coords = run.grid.coordinates()
    return [ParabolicPoint(tuple(float(c[i]) for c in coords), t0) for i in zip(*np.nonzero(flagged))]
