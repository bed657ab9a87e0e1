"""Landau-de Gennes bulk energy, its force, and the uniaxial minimizer manifold N."""

import math
from dataclasses import dataclass

import numpy as np

from .algebra import eig_sym3, frobenius, uniaxial
from .errors import InvalidInputError, ProjectionDegenerateError, UndefinedRatioError

SQRT2 = math.sqrt(2.0)
SQRT6 = math.sqrt(6.0)


@dataclass(frozen=True)
class MaterialParams:
    """Bulk coefficients ``a, b, c``, elastic constant ``L1``, rotational
    constant ``Gamma`` and relaxation parameter ``eps``.

    ``b = 0`` is admitted (the closed forms still make sense), every other
    constant must be strictly positive.
    """

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    L1: float = 1.0
    Gamma: float = 1.0
    eps: float = 1e-2

    def __post_init__(self):
        for name in ("a", "b", "c", "L1", "Gamma", "eps"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidInputError(f"{name} must be finite, got {value}")
            lower_ok = value >= 0.0 if name == "b" else value > 0.0
            if not lower_ok:
                raise InvalidInputError(f"{name} must be positive, got {value}")

    def replace(self, **changes):
        values = {k: getattr(self, k) for k in ("a", "b", "c", "L1", "Gamma", "eps")}
        values.update(changes)
        return MaterialParams(**values)

    @property
    def diffusivity(self):
        return self.L1 / self.Gamma


def s_plus(p):
    """Preferred uniaxial order parameter, root of ``2c s^2 - b s - 3a = 0``."""
    return (p.b + math.sqrt(p.b * p.b + 24.0 * p.a * p.c)) / (4.0 * p.c)


def bulk_energy(q, p):
    """``f_B = -(a/2)|Q|^2 - (b/3) tr Q^3 + (c/4)|Q|^4``."""
    q = np.asarray(q, dtype=float)
    n2 = frobenius(q, q)
    tr3 = np.einsum("...ij,...jk,...ki->...", q, q, q)
    return -0.5 * p.a * n2 - p.b / 3.0 * tr3 + 0.25 * p.c * n2 * n2


def bulk_energy_min(p):
    # f_B on N: |Q|^2 = 2 s^2 / 3 and tr Q^3 = 2 s^3 / 9
    s = s_plus(p)
    return -p.a * s**2 / 3.0 - 2.0 * p.b * s**3 / 27.0 + p.c * s**4 / 9.0


def tilde_bulk_energy(q, p):
    """Bulk energy shifted to vanish on N."""
    return bulk_energy(q, p) - bulk_energy_min(p)


def bulk_force_J(q, p):
    """``J(Q) = -aQ - bQ^2 + c|Q|^2 Q + (b/3)|Q|^2 Id``, the gradient of f_B on traceless tensors."""
    q = np.asarray(q, dtype=float)
    n2 = frobenius(q, q)[..., None, None]
    return -p.a * q - p.b * (q @ q) + p.c * n2 * q + (p.b / 3.0) * n2 * np.eye(3)


def lipschitz_bound_J(p, radius):
    """Upper bound for the Lipschitz constant of J on ``{|Q| <= radius}``."""
    return p.a + 2.0 * p.b * radius + 3.0 * p.c * radius**2


@dataclass(frozen=True)
class FrameAtQ:
    """Eigenframe with ``n3`` the principal director and the orthonormal basis
    ``(t1, t2)`` of the tangent space plus ``(e1, e2, e3)`` of the normal space.

    Arrays broadcast over leading axes: ``n1`` has shape ``(..., 3)``.
    """

    n1: np.ndarray
    n2: np.ndarray
    n3: np.ndarray

    @property
    def tangent(self):
        n1, n2, n3 = self.n1, self.n2, self.n3
        t1 = (_outer(n3, n2) + _outer(n2, n3)) / SQRT2
        t2 = (_outer(n3, n1) + _outer(n1, n3)) / SQRT2
        return np.stack([t1, t2], axis=-3)

    @property
    def normal(self):
        n1, n2 = self.n1, self.n2
        e1 = (_outer(n2, n1) + _outer(n1, n2)) / SQRT2
        e2 = (_outer(n1, n1) - _outer(n2, n2)) / SQRT2
        e3 = SQRT6 * (0.5 * _outer(n1, n1) + 0.5 * _outer(n2, n2) - np.eye(3) / 3.0)
        return np.stack([e1, e2, e3], axis=-3)

    @property
    def basis(self):
        """``(..., 5, 3, 3)``: t1, t2, e1, e2, e3."""
        return np.concatenate([self.tangent, self.normal], axis=-3)


def _outer(u, v):
    return u[..., :, None] * v[..., None, :]


def frame_from_eig(eig):
    # principal (top) eigenvector plays the role of n3
    return FrameAtQ(n1=eig.vectors[..., :, 1], n2=eig.vectors[..., :, 2], n3=eig.vectors[..., :, 0])


def frame_at(q):
    return frame_from_eig(eig_sym3(q))


def project_to_N(q, p, gap_tol=1e-8):
    """Nearest point ``s+(n n - Id/3)`` on N with ``n`` the top eigenvector.

    Returns the projected tensor(s) and the frame. Raises
    :class:`ProjectionDegenerateError` where ``lambda1 - lambda2 < gap_tol``.
    """
    eig = eig_sym3(q)
    gap = eig.gap
    bad = gap < gap_tol
    if np.any(bad):
        cells = np.argwhere(bad) if np.ndim(bad) else None
        raise ProjectionDegenerateError(
            f"eigenvalue gap below {gap_tol:g}; projection onto N is not unique", cells=cells
        )
    frame = frame_from_eig(eig)
    return uniaxial(s_plus(p), frame.n3), frame


def _dist_from_minor(x, y, s):
    return np.sqrt((x + s / 3.0) ** 2 + (y + s / 3.0) ** 2 + (x + y + 2.0 * s / 3.0) ** 2)


def dist_to_N(q, p, eig=None):
    """Distance to N from the two non-principal eigenvalues."""
    if eig is None:
        eig = eig_sym3(q)
    return _dist_from_minor(eig.values[..., 1], eig.values[..., 2], s_plus(p))


def decompose_at_N(v, frame):
    """Coefficients of ``v`` on the tangent basis (2) and the normal basis (3)."""
    v = np.asarray(v, dtype=float)
    tang = np.einsum("...kij,...ij->...k", frame.tangent, v)
    nrm = np.einsum("...kij,...ij->...k", frame.normal, v)
    return tang, nrm


def scalar_G(x, y, p):
    """Squared distance to N as a function of the two minor eigenvalues."""
    return _dist_from_minor(x, y, s_plus(p)) ** 2


def scalar_H(x, y, p):
    """Shifted bulk energy of the tensor with eigenvalues ``(x, y, -x-y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = x * x + y * y + x * y
    return -p.a * k + p.b * (x * x * y + x * y * y) + p.c * k * k - bulk_energy_min(p)


def bulk_ratio_band(p):
    """Asymptotic bounds on ``f~_B / dist^2`` near N."""
    s = s_plus(p)
    return p.b * s / 12.0, 3.0 * p.a + 0.75 * p.b * s


def lemma24_ratio(q, p, radius=None):
    """``f~_B(Q) / dist(Q, N)^2``; requires ``0 < dist`` (and ``dist < radius`` if given)."""
    q = np.asarray(q, dtype=float)
    d = dist_to_N(q, p)
    if np.any(d <= 0.0):
        raise UndefinedRatioError("ratio undefined on N (distance is zero)")
    if radius is not None and np.any(d >= radius):
        raise InvalidInputError(f"distance to N exceeds the admissible radius {radius:g}")
    return tilde_bulk_energy(q, p) / d**2
