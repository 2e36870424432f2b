"""Portable little-endian binary format for fields on a collocation grid.

Layout::

    b"RNLSFLD1"                      8 bytes
    u8  dimension                    1 or 2
    u8  boundary code                0 = dirichlet (sine), 1 = periodic
    per axis: f64 a, f64 b, u32 N
    payload: f64 (re, im) per collocation point, row-major

Values are stored as double precision, so extended-precision fields are
rounded on write.
"""
from __future__ import annotations

import os
import struct
from typing import NamedTuple

import numpy as np

from .errors import FormatError, RnlsError
from .grid import DIRICHLET, PERIODIC, Grid

MAGIC = b"RNLSFLD1"
BOUNDARY_CODES = {DIRICHLET: 0, PERIODIC: 1}
_AXIS = struct.Struct("<ddI")
_HEAD = struct.Struct("<BB")


class FieldFile(NamedTuple):
    grid: Grid
    values: np.ndarray


def encode_field(values, grid: Grid) -> bytes:
    values = grid.check(values).astype(np.complex128)
    parts = [MAGIC, _HEAD.pack(grid.dim, BOUNDARY_CODES[grid.boundary])]
    for a, b, n in zip(grid.lower, grid.upper, grid.points):
        parts.append(_AXIS.pack(a, b, n))
    parts.append(np.ascontiguousarray(values).astype("<c16").tobytes())
    return b"".join(parts)


def write_field(values, grid: Grid, path) -> None:
    """Write ``values`` on ``grid`` to ``path`` (atomically replaced)."""
    data = encode_field(values, grid)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def decode_field(data: bytes) -> FieldFile:
    if len(data) < len(MAGIC) or data[:len(MAGIC)] != MAGIC:
        raise FormatError("bad magic, not a field file", 0)
    off = len(MAGIC)
    if len(data) < off + _HEAD.size:
        raise FormatError(f"truncated header: expected {off + _HEAD.size} bytes, got {len(data)}", len(data))
    dim, code = _HEAD.unpack_from(data, off)
    if dim not in (1, 2):
        raise FormatError(f"unsupported dimension {dim}", off)
    boundary = {v: k for k, v in BOUNDARY_CODES.items()}.get(code)
    if boundary is None:
        raise FormatError(f"unknown boundary code {code}", off + 1)
    off += _HEAD.size
    need = off + dim * _AXIS.size
    if len(data) < need:
        raise FormatError(f"truncated header: expected {need} bytes, got {len(data)}", len(data))
    lower, upper, points = [], [], []
    for _ in range(dim):
        a, b, n = _AXIS.unpack_from(data, off)
        lower.append(a)
        upper.append(b)
        points.append(n)
        off += _AXIS.size
    try:
        grid = Grid(tuple(lower), tuple(upper), tuple(points), boundary)
    except RnlsError as exc:
        raise FormatError(f"inconsistent grid metadata: {exc}", len(MAGIC)) from exc
    need = off + 16 * grid.size
    if len(data) != need:
        kind = "truncated payload" if len(data) < need else "trailing bytes after payload"
        raise FormatError(f"{kind}: expected {need} bytes, got {len(data)}", min(len(data), need))
    values = np.frombuffer(data, dtype="<c16", offset=off).astype(np.complex128).reshape(grid.shape)
    return FieldFile(grid, values)


def read_field(path) -> FieldFile:
    """Read a field file, validating its header and length."""
    with open(path, "rb") as fh:
        return decode_field(fh.read())
