"""Compensated summation and deterministic chunked reductions.

Long-horizon scans are processed in fixed-size chunks (``CHUNK``), each
reduced with numpy's pairwise sum, with a Neumaier-compensated carry across
chunk boundaries.  For a given chunk size the result is reproducible
bit-for-bit, independent of how callers slice the work.
"""

from __future__ import annotations

import math

import numpy as np

# Fixed chunk length for all horizon scans.  Changing it changes rounding,
# so it is part of the reproducibility contract.
CHUNK = 1 << 16


class Neumaier:
    """Running compensated sum (Neumaier's variant of Kahan summation)."""

    __slots__ = ("s", "c")

    def __init__(self, value: float = 0.0):
        self.s = float(value)
        self.c = 0.0

    def add(self, x: float) -> None:
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    @property
    def total(self) -> float:
        return self.s + self.c


def comp_sum(values) -> float:
    """Compensated sum of an iterable of floats (exactly rounded)."""
    return math.fsum(values)


def chunk_ranges(lo: int, hi: int, chunk: int = CHUNK):
    """Yield (a, b) with a..b inclusive covering lo..hi in fixed chunks."""
    a = lo
    while a <= hi:
        b = min(a + chunk - 1, hi)
        yield a, b
        a = b + 1


def chunked_sum(value_fn, lo: int, hi: int, chunk: int = CHUNK) -> float:
    """Sum value_fn(ns) over integers lo..hi with a compensated carry.

    ``value_fn`` receives an int64 numpy array and returns a float array.
    """
    if hi < lo:
        return 0.0
    acc = Neumaier()
    for a, b in chunk_ranges(lo, hi, chunk):
        ns = np.arange(a, b + 1, dtype=np.int64)
        acc.add(float(np.sum(value_fn(ns))))
    return acc.total


class LogSumExp:
    """Running log(sum(exp(...))) for sums whose terms overflow float64."""

    __slots__ = ("m", "r")

    def __init__(self):
        self.m = -math.inf  # current max exponent
        self.r = 0.0        # sum of exp(term - m)

    def add_array(self, log_terms: np.ndarray) -> None:
        if log_terms.size == 0:
            return
        m2 = float(np.max(log_terms))
        if m2 <= self.m:
            self.r += float(np.sum(np.exp(log_terms - self.m)))
        else:
            self.r = self.r * math.exp(self.m - m2) + float(
                np.sum(np.exp(log_terms - m2))
            )
            self.m = m2

    @property
    def log_total(self) -> float:
        if self.m == -math.inf:
            return -math.inf
        return self.m + math.log(self.r)
