"""Recovering an oriented director field from a Q-field near N."""

from collections import deque

import numpy as np

from ..algebra import eig_sym3
from ..errors import GapError, OrientationError
from ..fields import DirectorField


def _neighbours(idx, shape):
    for ax in range(len(shape)):
        for step in (1, -1):
            j = list(idx)
            j[ax] = (j[ax] + step) % shape[ax]
            yield tuple(j)


def lift_director(q, p=None, gap_tol=1e-8):
    """Top eigenvector per cell, with signs made coherent across the grid.

    Orientation spreads breadth-first from the cell with the widest
    eigenvalue gap; each new cell takes the sign that best agrees with the
    neighbour it was reached from. Afterwards every grid edge must join
    directors with a non-negative dot product, otherwise the line field is
    not orientable on the torus and :class:`OrientationError` names an edge.

    ``p`` is accepted for signature symmetry; the lift only needs the eigenframe.
    """
    grid = q.grid
    eig = eig_sym3(q.matrices())
    gap = eig.gap
    bad = gap < gap_tol
    if np.any(bad):
        cells = [tuple(int(i) for i in c) for c in np.argwhere(bad)]
        raise GapError(f"{len(cells)} cell(s) with eigenvalue gap below {gap_tol:g}", cells=cells)
    n = np.array(eig.vectors[..., :, 0])
    shape = grid.shape
    seen = np.zeros(shape, dtype=bool)
    start = np.unravel_index(int(np.argmax(gap)), shape)
    seen[start] = True
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for j in _neighbours(i, shape):
            if seen[j]:
                continue
            if np.dot(n[j], n[i]) < 0.0:
                n[j] = -n[j]
            seen[j] = True
            queue.append(j)
    for ax in range(grid.dim):
        dots = np.sum(n * np.roll(n, -1, ax), axis=-1)
        if np.any(dots < 0.0):
            i = tuple(int(k) for k in np.argwhere(dots < 0.0)[0])
            j = list(i)
            j[ax] = (j[ax] + 1) % shape[ax]
            raise OrientationError(f"director field is not orientable across edge {i} -> {tuple(j)}", edge=(i, tuple(j)))
    return DirectorField(grid, n, q.t, check=False)


def director_gap(n, m, grid=None):
    """L2 distance between two line fields, minimising over the sign cellwise."""
    a = n.data if hasattr(n, "data") else np.asarray(n)
    b = m.data if hasattr(m, "data") else np.asarray(m)
    grid = n.grid if grid is None else grid
    d_plus = np.sum((a - b) ** 2, axis=-1)
    d_minus = np.sum((a + b) ** 2, axis=-1)
    return float(np.sqrt(np.sum(np.minimum(d_plus, d_minus)) * grid.cell_volume))
