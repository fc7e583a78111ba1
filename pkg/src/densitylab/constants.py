"""Independent high-precision constants as exact rationals.

These back the exact-integer certificates and test oracles; they are
computed from elementary series with explicit tail bounds, not from the
float library constants they are compared against.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import mpmath


@lru_cache(maxsize=None)
def log2_fraction(terms: int = 80) -> Fraction:
    """log 2 = 2 * atanh(1/3) = sum 2 / ((2k+1) 3^(2k+1)); the truncation
    error is below the first omitted term (< 3^-161 at the default)."""
    total = Fraction(0)
    for k in range(terms):
        total += Fraction(2, (2 * k + 1) * 3 ** (2 * k + 1))
    return total


@lru_cache(maxsize=None)
def e_minus_one_bounds(terms: int = 90) -> tuple[Fraction, Fraction]:
    """Rational lo < e - 1 < hi from the factorial series; the tail after
    ``terms`` terms is below 2/(terms+1)!."""
    lo = Fraction(0)
    fact = 1
    for k in range(1, terms + 1):
        fact *= k
        lo += Fraction(1, fact)
    hi = lo + Fraction(2, fact * (terms + 1))
    return lo, hi


@lru_cache(maxsize=None)
def pi_sq_over_6(dps: int = 60) -> float:
    with mpmath.workdps(dps):
        return float(mpmath.pi ** 2 / 6)
