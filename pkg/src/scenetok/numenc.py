"""Fixed sine-cosine encoding tables for numeric tokens.

Position is the token's ordinal within the numeric vocabulary (0-based,
ascending), not its real value, so tables are range-independent. The learned
matrices combined here are opaque inputs produced elsewhere; this module only
validates shapes and sums.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import OddDimensionError, ShapeMismatchError

TABLE_MAGIC = b"NENC"


class EncodingMode(Enum):
    FIXED = "fixed"
    LEARNED = "learned"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class EncodingTable:
    n_positions: int
    dim: int
    values: np.ndarray  # (n_positions, dim) float64


def sincos_table(n: int, d: int) -> EncodingTable:
    """Table with sin(pos / 10000^(2i/d)) in column 2i and the cosine in 2i+1."""
    if n < 1:
        raise ValueError("need at least one position")
    if d < 2 or d % 2 != 0:
        raise OddDimensionError(f"dimension must be even and >= 2, got {d}")
    pos = np.arange(n, dtype=np.float64)[:, None]
    even = np.arange(0, d, 2, dtype=np.float64)[None, :]
    angles = pos / np.power(10000.0, even / d)
    values = np.empty((n, d), dtype=np.float64)
    values[:, 0::2] = np.sin(angles)
    values[:, 1::2] = np.cos(angles)
    return EncodingTable(n, d, values)


def combine(learned, fixed: EncodingTable, mode: EncodingMode) -> np.ndarray:
    """FIXED returns the table, LEARNED passes through, HYBRID sums elementwise."""
    learned = np.asarray(learned, dtype=np.float64)
    if learned.shape != fixed.values.shape:
        raise ShapeMismatchError(
            f"learned {learned.shape} vs fixed {fixed.values.shape}"
        )
    mode = EncodingMode(mode)
    if mode is EncodingMode.FIXED:
        return fixed.values.copy()
    if mode is EncodingMode.LEARNED:
        return learned.copy()
    return learned + fixed.values


def save_table(table: EncodingTable, stream) -> None:
    """Binary export: magic NENC, uint32 n and d, row-major little-endian f64."""
    own = stream if hasattr(stream, "write") else open(stream, "wb")
    try:
        own.write(TABLE_MAGIC)
        own.write(struct.pack("<II", table.n_positions, table.dim))
        own.write(np.ascontiguousarray(table.values, dtype="<f8").tobytes())
    finally:
        if own is not stream:
            own.close()


def load_table(stream) -> EncodingTable:
    own = stream if hasattr(stream, "read") else open(stream, "rb")
    try:
        data = own.read()
    finally:
        if own is not stream:
            own.close()
    if data[:4] != TABLE_MAGIC:
        raise ValueError("not an encoding table file")
    n, d = struct.unpack("<II", data[4:12])
    values = np.frombuffer(data[12:], dtype="<f8").reshape(n, d).astype(np.float64)
    return EncodingTable(n, d, values)
