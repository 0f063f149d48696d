"""Corpus statistics over token sequences.

Per-position concentration: for each position, the share of sequences whose
token there equals the most common one. Usage histograms: exact counts per
codebook ID plus the fraction of the codebook used at least once.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRangeError, RaggedInputError


def _check_rect(sequences) -> list:
    sequences = [list(s) for s in sequences]
    if not sequences:
        raise RaggedInputError("empty corpus")
    length = len(sequences[0])
    for i, seq in enumerate(sequences):
        if len(seq) != length:
            raise RaggedInputError(f"sequence {i} has length {len(seq)}, expected {length}")
    return sequences


def position_concentration(sequences) -> list[float]:
    """Most-common-token share at each position across equal-length sequences."""
    sequences = _check_rect(sequences)
    n = len(sequences)
    shares = []
    for pos in range(len(sequences[0])):
        counts = Counter(seq[pos] for seq in sequences)
        shares.append(max(counts.values()) / n)
    return shares


def most_common_by_position(sequences) -> list[tuple[int, float]]:
    """(token, share) per position; count ties resolve to the smaller token."""
    sequences = _check_rect(sequences)
    n = len(sequences)
    out = []
    for pos in range(len(sequences[0])):
        counts = Counter(seq[pos] for seq in sequences)
        token = min(counts, key=lambda t: (-counts[t], t))
        out.append((token, counts[token] / n))
    return out


@dataclass(frozen=True)
class UsageHistogram:
    counts: np.ndarray  # int64, one slot per codebook ID

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def used_fraction(self) -> float:
        return float(np.count_nonzero(self.counts)) / len(self.counts)


def usage_histogram(sequences, code_range: int) -> UsageHistogram:
    """Exact usage counts of codes in [0, code_range) over a corpus."""
    if code_range < 1:
        raise ValueError("code_range must be >= 1")
    flat = [int(c) for seq in sequences for c in seq]
    if flat:
        arr = np.asarray(flat, dtype=np.int64)
        bad = (arr < 0) | (arr >= code_range)
        if bad.any():
            raise OutOfRangeError(f"code {int(arr[bad][0])} outside [0, {code_range})")
        counts = np.bincount(arr, minlength=code_range)
    else:
        counts = np.zeros(code_range, dtype=np.int64)
    return UsageHistogram(counts.astype(np.int64))


def write_concentration_csv(shares, stream) -> None:
    stream.write("position,share\n")
    for pos, share in enumerate(shares):
        stream.write(f"{pos},{share:.6f}\n")


def write_histogram_csv(hist: UsageHistogram, stream) -> None:
    stream.write("code,count\n")
    for code, count in enumerate(hist.counts):
        stream.write(f"{code},{int(count)}\n")
