"""Residuals of the limiting flows evaluated on discrete snapshots."""

import numpy as np

from ..algebra import to_components, to_matrix
from ..errors import InvalidInputError
from ..fields import laplacian
from ..manifold import decompose_at_N, project_to_N
from ..solver import harmonic_rhs


def limit_residual(q1, q2, p, gap_tol=1e-8, dt=None):
    """Split ``dP/dt - (L1/Gamma) lap P`` into tangent and normal parts along N.

    ``P`` is the nearest-point projection of each snapshot onto N. The time
    derivative is the difference quotient over the pair and the Laplacian is
    taken at their average; the frame is that of the projected mean field.

    Returns ``(tangent_norm, lam)``: the L2 norm of the tangent coefficients
    and the cellwise magnitude of the normal part.
    """
    grid = q1.grid
    dt = q2.t - q1.t if dt is None else dt
    if dt <= 0.0:
        raise InvalidInputError("snapshots must be in increasing time order")
    p1, _ = project_to_N(q1.matrices(), p, gap_tol)
    p2, _ = project_to_N(q2.matrices(), p, gap_tol)
    _, frame = project_to_N(0.5 * (q1.matrices() + q2.matrices()), p, gap_tol)
    c1, c2 = to_components(p1), to_components(p2)
    res = (c2 - c1) / dt - p.diffusivity * laplacian(0.5 * (c1 + c2), grid)
    tang, nrm = decompose_at_N(to_matrix(res), frame)
    tangent_norm = float(np.sqrt(np.sum(tang * tang) * grid.cell_volume))
    lam = np.sqrt(np.sum(nrm * nrm, axis=-1))
    return tangent_norm, lam


def harmonic_residual(n_a, n_b, norm="l2"):
    """Norm of ``dn/dt - lap n - |grad n|^2 n`` for two director snapshots.

    The spatial terms use the mean of the pair. When both snapshots carry the
    same time the time derivative is dropped, which measures stationarity.
    """
    grid = n_a.grid
    dt = n_b.t - n_a.t
    mid = 0.5 * (n_a.data + n_b.data)
    res = -harmonic_rhs(mid, grid)
    if dt != 0.0:
        res = res + (n_b.data - n_a.data) / dt
    pointwise = np.sqrt(np.sum(res * res, axis=-1))
    if norm == "sup":
        return float(pointwise.max())
    if norm == "l2":
        return float(np.sqrt(np.sum(pointwise**2) * grid.cell_volume))
    raise InvalidInputError(f"norm must be 'l2' or 'sup', got {norm!r}")

