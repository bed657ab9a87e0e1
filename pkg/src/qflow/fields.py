"""Periodic grids, Q-tensor and director fields, and finite-difference stencils."""

from dataclasses import dataclass, field

import numpy as np

from .algebra import to_components, to_matrix
from .errors import InvalidInputError


@dataclass(frozen=True)
class Grid:
    """Periodic rectangular grid with ``shape[i]`` cells of width ``lengths[i] / shape[i]``."""

    shape: tuple
    lengths: tuple

    def __post_init__(self):
        shape = tuple(int(n) for n in np.atleast_1d(self.shape))
        lengths = tuple(float(x) for x in np.atleast_1d(self.lengths))
        if len(lengths) == 1 and len(shape) > 1:
            lengths = lengths * len(shape)
        if not 1 <= len(shape) <= 3:
            raise InvalidInputError(f"dimension must be 1, 2 or 3, got {len(shape)}")
        if len(lengths) != len(shape):
            raise InvalidInputError("shape and lengths differ in dimension")
        if min(shape) < 4:
            raise InvalidInputError(f"need at least 4 cells per axis, got {shape}")
        if min(lengths) <= 0.0:
            raise InvalidInputError(f"box lengths must be positive, got {lengths}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "lengths", lengths)

    @property
    def dim(self):
        return len(self.shape)

    @property
    def spacing(self):
        return tuple(L / n for L, n in zip(self.lengths, self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def size(self):
        return int(np.prod(self.shape))

    def coordinates(self):
        """Cell positions ``i * h`` as a tuple of broadcast arrays."""
        axes = [np.arange(n) * h for n, h in zip(self.shape, self.spacing)]
        return np.meshgrid(*axes, indexing="ij")

    @property
    def center(self):
        return tuple(0.5 * L for L in self.lengths)

    @classmethod
    def uniform(cls, dim, n, length=1.0):
        return cls((n,) * dim, (length,) * dim)


@dataclass(frozen=True, eq=False)
class QField:
    """Q-tensor per cell stored as ``(*grid.shape, 5)`` components, at time ``t``."""

    grid: Grid
    data: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.shape != self.grid.shape + (5,):
            raise InvalidInputError(f"QField data shape {data.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "data", data)

    def matrices(self):
        return to_matrix(self.data)

    @classmethod
    def from_matrices(cls, grid, matrices, t=0.0):
        return cls(grid, to_components(matrices), t)

    def with_data(self, data, t=None):
        return QField(self.grid, data, self.t if t is None else t)


@dataclass(frozen=True, eq=False)
class DirectorField:
    """Unit 3-vector per cell, shape ``(*grid.shape, 3)``, at time ``t``."""

    grid: Grid
    data: np.ndarray
    t: float = 0.0
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.shape != self.grid.shape + (3,):
            raise InvalidInputError(f"director data shape {data.shape} does not match grid {self.grid.shape}")
        if self.check:
            dev = np.abs(np.linalg.norm(data, axis=-1) - 1.0)
            if not np.all(dev <= 1e-12):
                raise InvalidInputError(f"director field is not unit length (max deviation {dev.max():.3e})")
        object.__setattr__(self, "data", data)


def _values(x):
    return x.data if isinstance(x, (QField, DirectorField)) else np.asarray(x, dtype=float)


def laplacian(values, grid):
    """Second-order periodic Laplacian applied componentwise.

    ``values`` has the grid axes first and any trailing component axes.
    """
    v = _values(values)
    out = np.zeros_like(v)
    for ax, h in enumerate(grid.spacing):
        out += (np.roll(v, 1, ax) + np.roll(v, -1, ax) - 2.0 * v) / (h * h)
    return out


def forward_diff(values, grid):
    """One-sided differences ``(v(x+h) - v(x)) / h``, stacked on a new axis after the grid axes."""
    v = _values(values)
    return np.stack([(np.roll(v, -1, ax) - v) / h for ax, h in enumerate(grid.spacing)], axis=grid.dim)


def central_diff(values, grid):
    v = _values(values)
    return np.stack(
        [(np.roll(v, -1, ax) - np.roll(v, 1, ax)) / (2.0 * h) for ax, h in enumerate(grid.spacing)],
        axis=grid.dim,
    )


def comp_sq(comps):
    """Frobenius norm squared of tensors given by components (..., 5)."""
    q11, q12, q13, q22, q23 = (comps[..., k] for k in range(5))
    return q11 * q11 + q22 * q22 + (q11 + q22) ** 2 + 2.0 * (q12 * q12 + q13 * q13 + q23 * q23)


def grad_sq_q(comps, grid):
    """Cell-centred ``|grad Q|^2`` as the mean of forward and backward one-sided squares.

    Summed over the grid this equals ``-sum Q : lap(Q)`` exactly, which keeps
    the discrete energy consistent with the Laplacian used by the flow.
    """
    sq = comp_sq(forward_diff(comps, grid))
    fwd = sq.sum(axis=-1)
    bwd = sum(np.roll(sq[..., ax], 1, ax) for ax in range(grid.dim))
    return 0.5 * (fwd + bwd)


def integrate(density, grid):
    return float(np.sum(density) * grid.cell_volume)


def l2_norm(values, grid, sq=None):
    """L2 norm of a field; ``sq`` optionally maps values to pointwise squared norms."""
    v = _values(values)
    pointwise = sq(v) if sq is not None else np.sum(v * v, axis=tuple(range(grid.dim, v.ndim)))
    return float(np.sqrt(np.sum(pointwise) * grid.cell_volume))
