"""Binary field snapshots (``QFLD1``).

Layout, all little-endian::

    b"QFLD1"
    int64    dimension d
    int64[d] cells per axis
    f64[d]   box lengths
    f64      time
    f64 x6   eps, a, b, c, L1, Gamma
    f64[...] cell data, row-major, 5 components per Q-tensor or 3 per director

The number of components is recovered from the payload size.
"""

import struct
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .fields import DirectorField, Grid, QField
from .manifold import MaterialParams

MAGIC = b"QFLD1"


def encode(field, p):
    grid = field.grid
    parts = [MAGIC, struct.pack("<q", grid.dim)]
    parts.append(struct.pack(f"<{grid.dim}q", *grid.shape))
    parts.append(struct.pack(f"<{grid.dim}d", *grid.lengths))
    parts.append(struct.pack("<7d", field.t, p.eps, p.a, p.b, p.c, p.L1, p.Gamma))
    parts.append(np.ascontiguousarray(field.data, dtype="<f8").tobytes())
    return b"".join(parts)


def decode(blob):
    """Inverse of :func:`encode`; returns ``(field, params)``."""
    if blob[:5] != MAGIC:
        raise InvalidInputError("not a QFLD1 snapshot (bad magic)")
    pos = 5
    (dim,) = struct.unpack_from("<q", blob, pos)
    pos += 8
    if not 1 <= dim <= 3:
        raise InvalidInputError(f"corrupt header: dimension {dim}")
    shape = struct.unpack_from(f"<{dim}q", blob, pos)
    pos += 8 * dim
    lengths = struct.unpack_from(f"<{dim}d", blob, pos)
    pos += 8 * dim
    t, eps, a, b, c, L1, gamma = struct.unpack_from("<7d", blob, pos)
    pos += 56
    grid = Grid(shape, lengths)
    payload = np.frombuffer(blob, dtype="<f8", offset=pos)
    ncomp, rem = divmod(payload.size, grid.size)
    if rem or ncomp not in (3, 5):
        raise InvalidInputError(f"payload of {payload.size} values does not fit {grid.size} cells")
    data = payload.reshape(grid.shape + (ncomp,)).astype(float)
    p = MaterialParams(a=a, b=b, c=c, L1=L1, Gamma=gamma, eps=eps)
    if ncomp == 5:
        return QField(grid, data, t), p
    return DirectorField(grid, data, t, check=False), p


def write_snapshot(path, field, p):
    Path(path).write_bytes(encode(field, p))


def read_snapshot(path):
    return decode(Path(path).read_bytes())
