"""Energy functionals, the per-snapshot diagnostics table and the Bochner ratio."""

from dataclasses import asdict, dataclass

import numpy as np

from ..algebra import to_matrix
from ..errors import InvalidInputError, ProjectionDegenerateError
from ..fields import QField, comp_sq, grad_sq_q, integrate, laplacian
from ..manifold import bulk_force_J, dist_to_N, tilde_bulk_energy

DIAGNOSTIC_COLUMNS = (
    "time",
    "E_total",
    "E_dirichlet",
    "E_bulk",
    "sup_absQ",
    "sup_distN",
    "cum_dtQ_sq",
    "tangent_residual",
    "lambda_L2",
    "lambda_sup",
)


def _comps(q):
    return q.data if isinstance(q, QField) else np.asarray(q, dtype=float)


def dirichlet_density(q, p, grid):
    return p.L1 / (2.0 * p.Gamma) * grad_sq_q(_comps(q), grid)


def bulk_density(q, p):
    return tilde_bulk_energy(to_matrix(_comps(q)), p) / (p.eps * p.Gamma)


def energy_density(q, p, grid=None):
    """``e = f~_B / (eps Gamma) + (L1 / 2 Gamma) |grad Q|^2`` per cell."""
    if grid is None:
        grid = q.grid
    return bulk_density(q, p) + dirichlet_density(q, p, grid)


def energy_parts(q, p, grid=None):
    """``(E_total, E_dirichlet, E_bulk)`` integrated over the box."""
    if grid is None:
        grid = q.grid
    e_dir = integrate(dirichlet_density(q, p, grid), grid)
    e_bulk = integrate(bulk_density(q, p), grid)
    return e_dir + e_bulk, e_dir, e_bulk


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    E_total: float
    E_dirichlet: float
    E_bulk: float
    sup_absQ: float
    sup_distN: float
    cum_dtQ_sq: float
    tangent_residual: float
    lambda_L2: float
    lambda_sup: float

    def as_row(self):
        return [getattr(self, name) for name in DIAGNOSTIC_COLUMNS]

    def as_dict(self):
        return asdict(self)


def diagnostics_records(run, gap_tol=1e-8):
    """One :class:`DiagnosticsRecord` per stored snapshot.

    The limit-equation residual at snapshot ``k`` uses the pair ``(k, k+1)``
    (``(k-1, k)`` for the last one).
    """
    from .residuals import limit_residual

    p, grid = run.params, run.grid
    out = []
    for k in range(len(run)):
        comps = run.snapshots[k]
        total, e_dir, e_bulk = energy_parts(comps, p, grid)
        dist = dist_to_N(to_matrix(comps), p)
        j = min(k, len(run) - 2)
        if len(run) >= 2:
            try:
                tang, lam = limit_residual(run.field(j), run.field(j + 1), p, gap_tol=gap_tol)
                lam_l2 = float(np.sqrt(np.sum(lam * lam) * grid.cell_volume))
                lam_sup = float(np.max(np.abs(lam)))
            except ProjectionDegenerateError:
                # no well-defined nearest point somewhere; the residual is undefined
                tang, lam_l2, lam_sup = float("nan"), float("nan"), float("nan")
        else:
            tang, lam_l2, lam_sup = 0.0, 0.0, 0.0
        out.append(
            DiagnosticsRecord(
                time=float(run.times[k]),
                E_total=total,
                E_dirichlet=e_dir,
                E_bulk=e_bulk,
                sup_absQ=float(np.sqrt(comp_sq(comps).max())),
                sup_distN=float(dist.max()),
                cum_dtQ_sq=float(run.dissipation[k]),
                tangent_residual=float(tang),
                lambda_L2=lam_l2,
                lambda_sup=lam_sup,
            )
        )
    return out


@dataclass(frozen=True)
class BochnerResult:
    """Pointwise Bochner ratio and whether the near-N hypothesis held.

    ``ratio`` is NaN at cells whose stencil leaves the ``eps0`` neighbourhood.
    """

    ratio: np.ndarray
    hypothesis_met: bool
    sup_dist: float
    mask: np.ndarray

    @property
    def sup(self):
        vals = self.ratio[self.mask]
        return float(np.max(vals)) if vals.size else float("nan")


def bochner_from_snapshots(q_prev, q_mid, q_next, dt, p, eps0=None, floor=1e-12):
    """``[(d/dt - (L1/Gamma) lap) e + |J|^2 / (eps Gamma)^2] / max(e^2, floor)``.

    ``q_prev``, ``q_mid`` and ``q_next`` are consecutive snapshots ``dt``
    apart; the time derivative is centred.
    """
    from ..manifold import s_plus

    grid = q_mid.grid
    if eps0 is None:
        eps0 = 0.05 * s_plus(p)
    e_prev = energy_density(q_prev, p)
    e_mid = energy_density(q_mid, p)
    e_next = energy_density(q_next, p)
    heat = (e_next - e_prev) / (2.0 * dt) - p.L1 / p.Gamma * laplacian(e_mid, grid)
    jm = bulk_force_J(q_mid.matrices(), p)
    force = np.einsum("...ij,...ij->...", jm, jm) / (p.eps * p.Gamma) ** 2
    ratio = (heat + force) / np.maximum(e_mid * e_mid, floor)

    dist = dist_to_N(q_mid.matrices(), p)
    near = dist < eps0
    stencil_ok = near.copy()
    for ax in range(grid.dim):
        stencil_ok &= np.roll(near, 1, ax) & np.roll(near, -1, ax)
    ratio = np.where(stencil_ok, ratio, np.nan)
    return BochnerResult(ratio, bool(np.all(stencil_ok)), float(dist.max()), stencil_ok)


def bochner_ratio(run, p=None, index=None, eps0=None, floor=1e-12):
    """Bochner ratio at snapshot ``index`` of a run.

    The default is the latest snapshot whose two neighbours are equally spaced.

    Needs the neighbouring snapshots on both sides, equally spaced.
    """
    p = run.params if p is None else p
    if len(run) < 3:
        raise InvalidInputError("the Bochner ratio needs three snapshots")
    if index is None:
        t = np.asarray(run.times)
        gaps = np.diff(t)
        even = np.nonzero(np.abs(gaps[1:] - gaps[:-1]) <= 1e-9 * gaps[1:])[0]
        if even.size == 0:
            raise InvalidInputError("no snapshot has equally spaced neighbours")
        index = int(even[-1]) + 1
    k = index % len(run)
    if not 1 <= k <= len(run) - 2:
        raise InvalidInputError(f"snapshot {k} has no neighbour on one side")
    dt_a = run.times[k] - run.times[k - 1]
    dt_b = run.times[k + 1] - run.times[k]
    if abs(dt_a - dt_b) > 1e-9 * max(dt_a, dt_b):
        raise InvalidInputError("snapshots around the Bochner point are not equally spaced")
    return bochner_from_snapshots(run.field(k - 1), run.field(k), run.field(k + 1), dt_a, p, eps0, floor)
