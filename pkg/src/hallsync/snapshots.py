"""Binary state snapshots with bit-exact roundtrip.

Layout (little-endian):
  magic  "HSYN1"             5 bytes
  n      u32
  time   f64
  nu, mu, eta                f64 each
  body: for each stored field (u then b, or b alone for the magnetic-only
  reduction) the complex coefficients in row-major (k1, k2, k3, component)
  order as f64 (re, im) pairs.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import Grid, SpectralField

__all__ = ["SnapshotError", "write_snapshot", "read_snapshot"]

MAGIC = b"HSYN1"
_HEADER = struct.Struct("<5sIdddd")


class SnapshotError(IOError):
    pass


def write_snapshot(path, fields: list[SpectralField], time: float,
                   nu: float, mu: float, eta: float) -> None:
    grid = fields[0].grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, grid.n, time, nu, mu, eta))
        for f in fields:
            data = np.ascontiguousarray(f.coeffs, dtype="<c16")
            fh.write(data.tobytes())


def read_snapshot(path):
    """Returns (fields, time, nu, mu, eta); field count inferred from size."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or raw[:5] != MAGIC:
        raise SnapshotError(f"{path}: bad magic or truncated header")
    magic, n, time, nu, mu, eta = _HEADER.unpack_from(raw)
    body = raw[_HEADER.size:]
    field_bytes = n ** 3 * 3 * 16
    if not body or len(body) % field_bytes:
        raise SnapshotError(
            f"{path}: body size {len(body)} is not a multiple of one "
            f"field ({field_bytes} bytes at n = {n})"
        )
    count = len(body) // field_bytes
    grid = Grid(n)
    fields = []
    for i in range(count):
        chunk = body[i * field_bytes:(i + 1) * field_bytes]
        coeffs = np.frombuffer(chunk, dtype="<c16").reshape(n, n, n, 3).copy()
        fields.append(SpectralField(grid, coeffs, divergence_free=True))
    return fields, time, nu, mu, eta
