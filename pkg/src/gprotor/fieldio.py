"""GPF1 binary snapshots of complex fields.

Layout: b"GPF1", u32 N, f64 L, then N·N complex values as interleaved
(re, im) f64 pairs, row-major with x fastest; all little-endian.
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .errors import FormatError
from .grid import ComplexField, Grid2D

MAGIC = b"GPF1"
_HEADER = struct.Struct("<4sId")


def save_field(field: ComplexField, path, meta: Optional[Mapping] = None) -> Path:
    """Write ``field``; with ``meta`` also write ``<path>.meta`` as key = value lines."""
    path = Path(path)
    g = field.grid
    payload = np.ascontiguousarray(field.values, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, g.N, float(g.L)))
        fh.write(payload.tobytes())
    if meta is not None:
        lines = [f"{k} = {_fmt(v)}" for k, v in meta.items()]
        Path(str(path) + ".meta").write_text("\n".join(lines) + "\n")
    return path


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def load_field(path) -> ComplexField:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        if not data.startswith(MAGIC[: len(data)]):
            raise FormatError("bad-format", f"{path}: not a GPF1 file")
        raise FormatError("short-read", f"{path}: truncated header")
    magic, N, L = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError("bad-format", f"{path}: magic {magic!r}")
    want = N * N * 16
    body = data[_HEADER.size:]
    if len(body) != want:
        raise FormatError("short-read", f"{path}: payload {len(body)} bytes, header implies {want}")
    values = np.frombuffer(body, dtype="<c16").reshape(N, N).astype(np.complex128)
    return ComplexField(Grid2D(N, L), values)


def read_meta(path) -> dict:
    """Parse a ``.meta`` sidecar back into strings keyed by name."""
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out
