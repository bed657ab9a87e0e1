"""Algebra of real symmetric traceless 3x3 tensors.

Functions accept a :class:`QTensor` or any array of shape ``(..., 3, 3)`` and
broadcast over the leading axes, so the same code serves single tensors and
whole grid fields.

The five stored components are ``(Q11, Q12, Q13, Q22, Q23)``; ``Q33`` is
rebuilt as ``-(Q11 + Q22)`` so symmetry and tracelessness hold by
construction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

_IDX = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2))


def to_matrix(components):
    """Expand ``(..., 5)`` component arrays to ``(..., 3, 3)`` matrices."""
    q = np.asarray(components, dtype=float)
    q11, q12, q13, q22, q23 = (q[..., k] for k in range(5))
    out = np.empty(q.shape[:-1] + (3, 3))
    out[..., 0, 0] = q11
    out[..., 0, 1] = out[..., 1, 0] = q12
    out[..., 0, 2] = out[..., 2, 0] = q13
    out[..., 1, 1] = q22
    out[..., 1, 2] = out[..., 2, 1] = q23
    out[..., 2, 2] = -(q11 + q22)
    return out


def to_components(matrix):
    """Pick the five independent entries of symmetric traceless matrices."""
    m = np.asarray(matrix, dtype=float)
    return np.stack([m[..., i, j] for i, j in _IDX], axis=-1)


def symmetric_traceless(matrix):
    """Vectorised symmetrisation followed by trace removal."""
    m = np.asarray(matrix, dtype=float)
    sym = 0.5 * (m + np.swapaxes(m, -1, -2))
    tr = np.trace(sym, axis1=-2, axis2=-1)
    return sym - (tr / 3.0)[..., None, None] * np.eye(3)


@dataclass(frozen=True, eq=False)
class QTensor:
    """A single Q-tensor stored as five independent components."""

    components: np.ndarray

    def __post_init__(self):
        comps = np.array(self.components, dtype=float).reshape(5)
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)

    @property
    def matrix(self):
        return to_matrix(self.components)

    def __array__(self, dtype=None, copy=None):
        m = self.matrix
        return m if dtype is None else m.astype(dtype)

    @property
    def norm(self):
        return float(np.sqrt(frobenius(self, self)))

    def __eq__(self, other):
        if not isinstance(other, QTensor):
            return NotImplemented
        return bool(np.array_equal(self.components, other.components))

    def __repr__(self):
        return f"QTensor({np.array2string(self.components, precision=6)})"


def from_matrix(matrix):
    """Project a finite 3x3 matrix onto the symmetric traceless tensors."""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (3, 3):
        raise InvalidInputError(f"expected a 3x3 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix has non-finite entries")
    return QTensor(to_components(symmetric_traceless(m)))


def uniaxial(s, n):
    """``s (n n^T - Id/3)`` for unit vector(s) ``n`` of shape ``(..., 3)``."""
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    return s[..., None, None] * (n[..., :, None] * n[..., None, :] - np.eye(3) / 3.0)


def frobenius(a, b):
    """``A:B = A_ij B_ij`` over the last two axes."""
    return np.einsum("...ij,...ij->...", np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def norm(a):
    return np.sqrt(frobenius(a, a))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order and eigenvectors stored as columns.

    ``vectors[..., :, k]`` belongs to ``values[..., k]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def gap(self):
        return self.values[..., 0] - self.values[..., 1]

    @property
    def n1(self):
        return self.vectors[..., :, 0]

    @property
    def n2(self):
        return self.vectors[..., :, 1]

    @property
    def n3(self):
        return self.vectors[..., :, 2]

    def reconstruct(self):
        v = self.vectors
        return np.einsum("...ik,...k,...jk->...ij", v, self.values, v)


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _fix_signs(vectors):
    # largest-magnitude component positive; argmax returns the first index on ties
    idx = np.argmax(np.abs(vectors), axis=-2)
    lead = np.take_along_axis(vectors, idx[..., None, :], axis=-2)
    return vectors * np.where(lead < 0.0, -1.0, 1.0)


def eig_sym3(q, gap_tol=0.0):
    """Eigen-decomposition of real symmetric 3x3 matrices.

    The eigenvalue that is farther from the other two is taken from the
    trigonometric solution of the characteristic cubic; its eigenvector comes
    from the best-conditioned cross product of two rows of ``Q - lambda Id``.
    The remaining pair is resolved by one exact Jacobi rotation of the 2x2
    block on the orthogonal complement, which stays accurate down to exact
    degeneracy. Tensors with ``|Q - tr(Q)/3 Id|`` at rounding level get the
    identity frame.

    ``gap_tol`` is accepted for interface symmetry with the projection
    routines; degenerate spectra are not an error here.
    """
    a = np.asarray(q, dtype=float)
    if a.shape[-2:] != (3, 3):
        raise InvalidInputError(f"expected (..., 3, 3), got {a.shape}")
    shape = a.shape[:-2]
    a = a.reshape((-1, 3, 3))
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    count = a.shape[0]

    mean = np.trace(a, axis1=1, axis2=2) / 3.0
    b = a - mean[:, None, None] * np.eye(3)
    scale = np.sqrt(np.einsum("kij,kij->k", b, b) / 6.0)
    tiny = scale <= 1e-14 * np.maximum(np.abs(mean), np.finfo(float).tiny)
    tiny |= scale == 0.0
    safe = np.where(tiny, 1.0, scale)
    # work at unit scale so cross products neither underflow nor overflow
    b = b / safe[:, None, None]
    det = (
        b[:, 0, 0] * (b[:, 1, 1] * b[:, 2, 2] - b[:, 1, 2] * b[:, 2, 1])
        - b[:, 0, 1] * (b[:, 1, 0] * b[:, 2, 2] - b[:, 1, 2] * b[:, 2, 0])
        + b[:, 0, 2] * (b[:, 1, 0] * b[:, 2, 1] - b[:, 1, 1] * b[:, 2, 0])
    )
    r = np.clip(det / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    top_first = r >= 0.0
    # isolated eigenvalue: the top one when r >= 0, else the bottom one
    lam_iso = np.where(top_first, 2.0 * np.cos(phi), 2.0 * np.cos(phi + 2.0 * np.pi / 3.0))

    m = b - lam_iso[:, None, None] * np.eye(3)
    rows = m
    crosses = np.stack(
        [
            np.cross(rows[:, 0], rows[:, 1]),
            np.cross(rows[:, 0], rows[:, 2]),
            np.cross(rows[:, 1], rows[:, 2]),
        ],
        axis=1,
    )
    sizes = np.einsum("kci,kci->kc", crosses, crosses)
    best = np.argmax(sizes, axis=1)
    v_iso = crosses[np.arange(count), best]
    bad = tiny | (sizes[np.arange(count), best] <= 0.0)
    v_iso[bad] = np.array([1.0, 0.0, 0.0])
    v_iso = _unit(v_iso)

    # orthonormal basis (u, w) of the complement of v_iso
    axis = np.argmin(np.abs(v_iso), axis=1)
    e = np.eye(3)[axis]
    u = _unit(np.cross(v_iso, e))
    w = np.cross(v_iso, u)

    bu = np.einsum("kij,kj->ki", b, u)
    bw = np.einsum("kij,kj->ki", b, w)
    c00 = np.einsum("ki,ki->k", u, bu)
    c11 = np.einsum("ki,ki->k", w, bw)
    c01 = np.einsum("ki,ki->k", u, bw)
    theta = 0.5 * np.arctan2(2.0 * c01, c00 - c11)
    ct, st = np.cos(theta), np.sin(theta)
    p1 = ct[:, None] * u + st[:, None] * w
    p2 = -st[:, None] * u + ct[:, None] * w

    def rayleigh(v):
        return np.einsum("ki,kij,kj->k", v, b, v)

    l_iso = rayleigh(v_iso)
    l1 = rayleigh(p1)
    l2 = rayleigh(p2)

    vals = np.stack([l_iso, l1, l2], axis=1)
    vecs = np.stack([v_iso, p1, p2], axis=2)
    order = np.argsort(-vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)

    vals[tiny] = 0.0
    vecs[tiny] = np.eye(3)
    vals = vals * safe[:, None] + mean[:, None]
    vecs = _fix_signs(vecs)
    return EigenDecomposition(vals.reshape(shape + (3,)), vecs.reshape(shape + (3, 3)))
