"""Integer subsets, counting functions, and density estimators.

A set A of positive integers is held in one of several representations
(finite list, arithmetic progression, increasing generator, union of
integer intervals, predicate with a declared scan horizon, or a union of
arithmetic-progression segments).  All of them answer two queries:

* ``count(n)``  -- exact number of elements in [1, n] (arbitrary precision),
* ``indicator(lo, hi)`` -- boolean membership array for a chunk scan.

Density reports estimate liminf/limsup quantities as min/max over a tail
window [tail_fraction * horizon, horizon]; the window is recorded in every
report since the estimates carry no convergence rate.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ClassError, DomainError, HorizonError
from .psi import PsiFunction, is_concave_on, psi_prime_sum
from .summation import CHUNK, Neumaier, chunk_ranges

# Interval blocks longer than this are bracketed analytically instead of
# being summed element by element in weighted_count.
BLOCK_BRACKET_THRESHOLD = 4096


# =====================================================================
# Representations
# =====================================================================

class IntegerSet:
    """Base class; concrete representations implement count/indicator."""

    label: str = "set"

    def count(self, n: int) -> int:
        raise NotImplementedError

    def indicator(self, lo: int, hi: int) -> np.ndarray:
        raise NotImplementedError

    def member(self, n: int) -> bool:
        return self.count(n) - self.count(n - 1) == 1 if n > 1 else self.count(1) == 1


class FiniteList(IntegerSet):
    """A finite set given by its sorted list of distinct positive integers."""

    def __init__(self, values: Sequence[int], label: str = "finite"):
        vals = [int(v) for v in values]
        if any(v < 1 for v in vals):
            raise DomainError("finite set elements must be positive")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise DomainError("finite set must be sorted strictly ascending")
        self.values = vals
        self.label = label

    def count(self, n: int) -> int:
        return bisect_right(self.values, n)

    def indicator(self, lo: int, hi: int) -> np.ndarray:
        mask = np.zeros(hi - lo + 1, dtype=bool)
        i = bisect_left(self.values, lo)
        j = bisect_right(self.values, hi)
        for v in self.values[i:j]:
            mask[v - lo] = True
        return mask

    def member(self, n: int) -> bool:
        i = bisect_left(self.values, n)
        return i < len(self.values) and self.values[i] == n


class ArithmeticProgression(IntegerSet):
    """{first, first + stride, first + 2*stride, ...}."""

    def __init__(self, first: int, stride: int, label: str = ""):
        if first < 1 or stride < 1:
            raise DomainError("first and stride must be positive")
        self.first = int(first)
        self.stride = int(stride)
        self.label = label or f"ap:{first},{stride}"

    def count(self, n: int) -> int:
        if n < self.first:
            return 0
        return (n - self.first) // self.stride + 1

    def indicator(self, lo: int, hi: int) -> np.ndarray:
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        return (ns >= self.first) & ((ns - self.first) % self.stride == 0)

    def member(self, n: int) -> bool:
        return n >= self.first and (n - self.first) % self.stride == 0


class IncreasingGeneratorSet(IntegerSet):
    """{phi(n) : n >= 1} for a strictly increasing non-negative phi.

    The first outputs are spot-checked at construction; members are cached
    as they are generated.  ``max_terms`` bounds how many terms the
    generator defines (file-backed sequences are finite).
    """

    def __init__(
        self,
        phi: Callable[[int], int],
        label: str = "phi",
        max_terms: Optional[int] = None,
        spot_check: int = 1000,
    ):
        self.phi = phi
        self.label = label
        self.max_terms = max_terms
        self._members: list[int] = []
        self._exhausted = False
        limit = min(spot_check, max_terms) if max_terms else spot_check
        prev = -1
        for k in range(1, limit + 1):
            v = int(phi(k))
            if v < 0:
                raise DomainError(f"{label}: phi({k}) = {v} is negative")
            if v <= prev:
                raise DomainError(f"{label}: phi not strictly increasing at n={k}")
            prev = v
            self._members.append(v)
        if max_terms is not None and max_terms <= limit:
            self._exhausted = True

    def term(self, k: int) -> int:
        """phi(k) for k >= 1."""
        if k < 1:
            raise DomainError("term index must be >= 1")
        if self.max_terms is not None and k > self.max_terms:
            raise HorizonError(f"{self.label}: only {self.max_terms} terms declared")
        while len(self._members) < k:
            self._members.append(int(self.phi(len(self._members) + 1)))
        return self._members[k - 1]

    def _extend_to_value(self, v: int) -> None:
        while not self._exhausted and (not self._members or self._members[-1] <= v):
            k = len(self._members) + 1
            if self.max_terms is not None and k > self.max_terms:
                self._exhausted = True
                break
            self._members.append(int(self.phi(k)))

    def count(self, n: int) -> int:
        self._extend_to_value(n)
        lo = bisect_left(self._members, 1)
        return bisect_right(self._members, n) - lo

    def indicator(self, lo: int, hi: int) -> np.ndarray:
        self._extend_to_value(hi)
        mask = np.zeros(hi - lo + 1, dtype=bool)
        i = bisect_left(self._members, max(lo, 1))
        j = bisect_right(self._members, hi)
        for v in self._members[i:j]:
            mask[v - lo] = True
        return mask


class IntervalUnion(IntegerSet):
    """Union of pairwise disjoint sorted closed integer intervals.

    Endpoints are arbitrary-precision integers; counting is pure interval
    arithmetic and never enumerates elements.
    """

    def __init__(self, intervals: Sequence[tuple], label: str = "intervals"):
        ivs = [(int(a), int(b)) for a, b in intervals]
        for a, b in ivs:
            if a < 1 or b < a:
                raise DomainError(f"bad interval [{a}, {b}]")
        for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
            if a2 <= b1:
                raise DomainError("intervals must be sorted and disjoint")
        self.intervals = ivs
        self.label = label
        self._los = [a for a, _ in ivs]
        cum = [0]
        for a, b in ivs:
            cum.append(cum[-1] + (b - a + 1))
        self._cum = cum

    @classmethod
    def from_blocks(cls, blocks: Sequence[tuple], label: str = "intervals"):
        """Build from possibly overlapping blocks by merging them."""
        blocks = sorted((int(a), int(b)) for a, b in blocks)
        merged: list[list[int]] = []
        for a, b in blocks:
            if merged and a <= merged[-1][1] + 1:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls([tuple(m) for m in merged], label=label)

    def count(self, n: int) -> int:
        j = bisect_right(self._los, n)
        if j == 0:
            return 0
        a, b = self.intervals[j - 1]
        return self._cum[j - 1] + (min(b, n) - a + 1)

    def indicator(self, lo: int, hi: int) -> np.ndarray:
        mask = np.zeros(hi - lo + 1, dtype=bool)
        j = bisect_right(self._los, hi)
        for a, b in self.intervals[:j]:
            if b < lo:
                continue
            mask[max(a, lo) - lo : min(b, hi) - lo + 1] = True
        return mask

    def member(self, n: int) -> bool:
        j = bisect_right(self._los, n)
        return j > 0 and n <= self.intervals[j - 1][1]


class PredicateSet(IntegerSet):
    """Membership by predicate, valid only up to a declared scan horizon."""

    def __init__(
        self,
        member_fn: Callable[[int], bool],
        scan_horizon: int,
        label: str = "predicate",
        values_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ):
        self.member_fn = member_fn
        self.scan_horizon = int(scan_horizon)
        self.label = label
        self.values_fn = values_fn

    def _check(self, n: int) -> None:
        if n > self.scan_horizon:
            raise HorizonError(
                f"{self.label}: query at {n} exceeds scan horizon {self.scan_horizon}"
            )

    def count(self, n: int) -> int:
        self._check(n)
        total = 0
        for a, b in chunk_ranges(1, n):
            total += int(np.count_nonzero(self.indicator(a, b)))
        return total

    def indicator(self, lo: int, hi: int) -> np.ndarray:
        self._check(hi)
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        if self.values_fn is not None:
            return np.asarray(self.values_fn(ns), dtype=bool)
        return np.fromiter(
            (bool(self.member_fn(int(k))) for k in ns), dtype=bool, count=len(ns)
        )

    def member(self, n: int) -> bool:
        self._check(n)
        return bool(self.member_fn(n))


class APSegmentSet(IntegerSet):
    """Union of arithmetic-progression segments (first, stride, lo, hi).

    Segments must be disjoint and sorted by lo.  Counting is closed-form in
    arbitrary precision, so stage boundaries far beyond float range are fine.
    """

    def __init__(self, segments: Sequence[tuple], label: str = "ap-segments"):
        segs = [tuple(int(x) for x in s) for s in segments]
        for first, stride, lo, hi in segs:
            if stride < 1 or lo < 1 or hi < lo:
                raise DomainError(f"bad segment {(first, stride, lo, hi)}")
        for s1, s2 in zip(segs, segs[1:]):
            if s2[2] <= s1[3]:
                raise DomainError("segments must be sorted and disjoint")
        self.segments = segs
        self.label = label

    @staticmethod
    def _ap_count(first: int, stride: int, a: int, b: int) -> int:
        """|{first + j*stride : j >= 0} ∩ [a, b]| in exact arithmetic."""
        if b < first:
            return 0
        a = max(a, first)
        lo_j = -((first - a) // stride)  # ceil((a - first)/stride)
        hi_j = (b - first) // stride
        return max(0, hi_j - lo_j + 1)

    def count(self, n: int) -> int:
        total = 0
        for first, stride, lo, hi in self.segments:
            if lo > n:
                break
            total += self._ap_count(first, stride, lo, min(hi, n))
        return total

    def member(self, n: int) -> bool:
        for first, stride, lo, hi in self.segments:
            if lo <= n <= hi:
                return n >= first and (n - first) % stride == 0
        return False

    def indicator(self, lo: int, hi: int) -> np.ndarray:
        mask = np.zeros(hi - lo + 1, dtype=bool)
        for first, stride, slo, shi in self.segments:
            if shi < lo or slo > hi:
                continue
            a, b = max(slo, lo), min(shi, hi)
            if b < first:
                continue
            start = first + (-((first - max(a, first)) // stride)) * stride
            if start > b:
                continue
            mask[start - lo : b - lo + 1 : stride] = True
        return mask


class PrimesSet(IntegerSet):
    """The primes up to a sieve limit (exact counts via cumulative sieve)."""

    def __init__(self, limit: int):
        if limit < 2:
            raise DomainError("sieve limit must be >= 2")
        self.limit = int(limit)
        self.label = f"primes:{limit}"
        self._flags = _sieve(self.limit)
        self._cum = np.cumsum(self._flags.astype(np.int64))

    def _check(self, n: int) -> None:
        if n > self.limit:
            raise HorizonError(f"primes sieved only up to {self.limit}")

    def count(self, n: int) -> int:
        self._check(n)
        return int(self._cum[n - 1]) if n >= 1 else 0

    def indicator(self, lo: int, hi: int) -> np.ndarray:
        self._check(hi)
        return self._flags[lo - 1 : hi].copy()

    def member(self, n: int) -> bool:
        self._check(n)
        return bool(self._flags[n - 1])


@lru_cache(maxsize=8)
def _sieve(limit: int) -> np.ndarray:
    """Boolean primality flags for 1..limit (index k-1 <-> integer k)."""
    flags = np.ones(limit, dtype=bool)
    flags[0] = False  # 1 is not prime
    for p in range(2, int(math.isqrt(limit)) + 1):
        if flags[p - 1]:
            flags[p * p - 1 :: p] = False
    return flags


# =====================================================================
# Counting operations
# =====================================================================

def count(A: IntegerSet, n: int) -> int:
    """Exact number of elements of A in [1, n]."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return A.count(int(n))


@dataclass(frozen=True)
class WeightedCount:
    """Sum of psi' over members of A up to n, with a bracket error bound.

    ``error_bound`` is zero when every contribution was summed exactly;
    bracketed interval blocks contribute psi'(lo) + psi(hi) - psi(lo), an
    upper estimate whose true value lies within [value - error_bound, value].
    """

    value: float
    error_bound: float

    def __float__(self) -> float:
        return self.value


def weighted_count(
    A: IntegerSet,
    psi: PsiFunction,
    n: int,
    block_threshold: int = BLOCK_BRACKET_THRESHOLD,
) -> WeightedCount:
    """Compensated sum of psi'(k) over members k <= n.

    Interval unions with long blocks under a concave weight are bracketed
    block-wise instead of enumerated; the bracket width is returned as
    ``error_bound``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    n = int(n)
    if isinstance(A, IntervalUnion) and is_concave_on(psi, min(n, 100_000)):
        val = Neumaier()
        err = Neumaier()
        for a, b in A.intervals:
            if a > n:
                break
            b = min(b, n)
            if b - a + 1 <= block_threshold:
                for lo, hi in chunk_ranges(a, b):
                    xs = np.arange(lo, hi + 1, dtype=float)
                    val.add(float(np.sum(psi.derivative(xs))))
            else:
                da = float(psi.derivative(float(a)))
                db = float(psi.derivative(float(b)))
                val.add(da + float(psi.value(float(b))) - float(psi.value(float(a))))
                err.add(da - db)
        return WeightedCount(value=val.total, error_bound=err.total)
    acc = Neumaier()
    for a, b in chunk_ranges(1, n):
        ind = A.indicator(a, b)
        if ind.any():
            xs = np.arange(a, b + 1, dtype=float)
            acc.add(float(np.sum(psi.derivative(xs)[ind])))
    return WeightedCount(value=acc.total, error_bound=0.0)


# =====================================================================
# Density reports
# =====================================================================

@dataclass(frozen=True)
class DensityReport:
    """Finite-horizon density estimate over a recorded tail window."""

    set_label: str
    psi_label: Optional[str]
    normalization: Optional[str]
    lower_estimate: float
    upper_estimate: float
    final_ratio: float
    horizon: int
    tail_fraction: float
    checkpoints: tuple


class _RatioScan:
    """Tracks window min/max and checkpoint values of a ratio sequence."""

    def __init__(self, horizon: int, tail_fraction: float, start: int = 1):
        if not 0 < tail_fraction < 1:
            raise DomainError("tail_fraction must lie in (0, 1)")
        self.horizon = horizon
        self.tail_fraction = tail_fraction
        self.window_start = max(start, int(math.ceil(horizon * tail_fraction)))
        self.low = math.inf
        self.high = -math.inf
        cps = []
        x = float(start)
        while x < horizon:
            c = int(round(x))
            if not cps or c > cps[-1]:
                cps.append(c)
            x *= 2.0
        if not cps or cps[-1] != horizon:
            cps.append(horizon)
        self._cps = cps
        self._cp_values: dict[int, float] = {}
        self.final = math.nan

    def feed(self, ns: np.ndarray, ratios: np.ndarray) -> None:
        mask = ns >= self.window_start
        if mask.any():
            vals = ratios[mask]
            self.low = min(self.low, float(np.min(vals)))
            self.high = max(self.high, float(np.max(vals)))
        lo, hi = int(ns[0]), int(ns[-1])
        i = bisect_left(self._cps, lo)
        while i < len(self._cps) and self._cps[i] <= hi:
            c = self._cps[i]
            self._cp_values[c] = float(ratios[c - lo])
            i += 1
        if hi == self.horizon:
            self.final = float(ratios[-1])

    def checkpoints(self) -> tuple:
        return tuple((c, self._cp_values[c]) for c in self._cps if c in self._cp_values)


def linear_density_report(
    A: IntegerSet, horizon: int, tail_fraction: float = 0.5
) -> DensityReport:
    """min/max of A(n)/n over the tail window, with logarithmic checkpoints."""
    if horizon < 1000:
        raise DomainError("horizon must be >= 1e3")
    scan = _RatioScan(horizon, tail_fraction)
    carry = 0
    for a, b in chunk_ranges(1, horizon):
        ind = A.indicator(a, b)
        counts = carry + np.cumsum(ind, dtype=np.int64)
        ns = np.arange(a, b + 1, dtype=np.int64)
        scan.feed(ns, counts / ns)
        carry = int(counts[-1])
    return DensityReport(
        set_label=A.label,
        psi_label=None,
        normalization=None,
        lower_estimate=scan.low,
        upper_estimate=scan.high,
        final_ratio=scan.final,
        horizon=horizon,
        tail_fraction=tail_fraction,
        checkpoints=scan.checkpoints(),
    )


def psi_density_report(
    A: IntegerSet,
    psi: PsiFunction,
    horizon: int,
    tail_fraction: float = 0.5,
    normalization: str = "sum",
) -> DensityReport:
    """min/max over the tail window of the weighted counting ratio.

    ``normalization="sum"`` divides by sum(psi'(1..n)); ``"psi_value"``
    divides by psi(n) and requires the two denominators to agree within 5%
    at the horizon (the asymptotic-equivalence precondition).
    """
    if horizon < 1000:
        raise DomainError("horizon must be >= 1e3")
    if normalization not in ("sum", "psi_value"):
        raise DomainError(f"unknown normalization {normalization!r}")
    if normalization == "psi_value":
        s = psi_prime_sum(psi, horizon)
        pv = float(psi.value(float(horizon)))
        if not (math.isfinite(s) and math.isfinite(pv)) or abs(s / pv - 1.0) > 0.05:
            raise ClassError(
                f"{psi.label}: psi_value normalization needs sum(psi') ~ psi(n); "
                "use normalization='sum'"
            )
    scan = _RatioScan(horizon, tail_fraction)
    num = Neumaier()
    den = Neumaier()
    for a, b in chunk_ranges(1, horizon):
        ns = np.arange(a, b + 1, dtype=np.int64)
        xs = ns.astype(float)
        d = np.asarray(psi.derivative(xs), dtype=float)
        ind = A.indicator(a, b)
        w = np.where(ind, d, 0.0)
        nums = num.total + np.cumsum(w)
        if normalization == "sum":
            dens = den.total + np.cumsum(d)
            den.add(float(np.sum(d)))
        else:
            dens = np.asarray(psi.value(xs), dtype=float)
        scan.feed(ns, nums / dens)
        num.add(float(np.sum(w)))
    return DensityReport(
        set_label=A.label,
        psi_label=psi.label,
        normalization=normalization,
        lower_estimate=scan.low,
        upper_estimate=scan.high,
        final_ratio=scan.final,
        horizon=horizon,
        tail_fraction=tail_fraction,
        checkpoints=scan.checkpoints(),
    )


def as_term_function(phi) -> tuple[Callable[[int], int], str]:
    """Normalize a set-of-increasing-elements argument to (term, label):
    accepts an IncreasingGeneratorSet, an ArithmeticProgression, or a plain
    callable n -> phi(n)."""
    if isinstance(phi, IncreasingGeneratorSet):
        return phi.term, phi.label
    if isinstance(phi, ArithmeticProgression):
        return (
            lambda k, f=phi.first, s=phi.stride: f + (k - 1) * s,
            phi.label,
        )
    if callable(phi):
        gen = IncreasingGeneratorSet(phi, label="phi")
        return gen.term, gen.label
    raise DomainError(f"cannot interpret {phi!r} as an increasing sequence")


def density_along_phi(
    phi,
    psi: PsiFunction,
    terms: int,
    tail_fraction: float = 0.5,
) -> DensityReport:
    """Density estimate evaluated only at the set's own elements.

    For concave weights the weighted count at phi(n) collapses to
    sum(psi'(phi(k)), k <= n), so the ratio sequence is computed per term
    index.  Concavity is grid-checked (up to 1e5) and required.
    """
    if terms < 100:
        raise DomainError("need at least 100 terms")
    term, label = as_term_function(phi)
    if not is_concave_on(psi, 100_000):
        raise ClassError(f"{psi.label}: density along the set needs a concave weight")
    scan = _RatioScan(terms, tail_fraction)
    acc = Neumaier()
    for a, b in chunk_ranges(1, terms):
        vals = np.array([float(term(k)) for k in range(a, b + 1)])
        d = np.asarray(psi.derivative(vals), dtype=float)
        nums = acc.total + np.cumsum(d)
        dens = np.asarray(psi.value(vals), dtype=float)
        scan.feed(np.arange(a, b + 1, dtype=np.int64), nums / dens)
        acc.add(float(np.sum(d)))
    return DensityReport(
        set_label=label,
        psi_label=psi.label,
        normalization="psi_value",
        lower_estimate=scan.low,
        upper_estimate=scan.high,
        final_ratio=scan.final,
        horizon=terms,
        tail_fraction=tail_fraction,
        checkpoints=scan.checkpoints(),
    )


@dataclass(frozen=True)
class ChainReport:
    """The ordered linear/weighted density estimates and their chain check."""

    set_label: str
    psi_label: str
    chain: str  # "concave" | "convex"
    lower_linear: float
    lower_psi: float
    upper_psi: float
    upper_linear: float
    slack: float
    ordered: bool


def chain_check(
    A: IntegerSet,
    psi: PsiFunction,
    horizon: int,
    tail_fraction: float = 0.5,
    slack: float = 0.02,
) -> ChainReport:
    """Assemble linear and weighted density estimates and check that they
    are ordered the way the weight class dictates (concave weights nest the
    weighted estimates inside the linear ones, convex weights outside).
    Estimates are asymptotic, hence the additive slack."""
    from .psi import classify  # local import to keep module load light

    rep = classify(psi, max(16, min(horizon, 100_000)))
    if not (rep.in_D1 or rep.in_D2):
        raise ClassError(f"{psi.label}: chain check requires a classified weight")
    lin = linear_density_report(A, horizon, tail_fraction)
    wei = psi_density_report(A, psi, horizon, tail_fraction, normalization="sum")
    if rep.in_D1:
        chain = "concave"
        ordered = (
            lin.lower_estimate <= wei.lower_estimate + slack
            and wei.lower_estimate <= wei.upper_estimate + slack
            and wei.upper_estimate <= lin.upper_estimate + slack
        )
    else:
        chain = "convex"
        ordered = (
            wei.lower_estimate <= lin.lower_estimate + slack
            and lin.lower_estimate <= lin.upper_estimate + slack
            and lin.upper_estimate <= wei.upper_estimate + slack
        )
    return ChainReport(
        set_label=A.label,
        psi_label=psi.label,
        chain=chain,
        lower_linear=lin.lower_estimate,
        lower_psi=wei.lower_estimate,
        upper_psi=wei.upper_estimate,
        upper_linear=lin.upper_estimate,
        slack=slack,
        ordered=ordered,
    )


# =====================================================================
# Set literals
# =====================================================================

def parse_set(text: str, default_horizon: int = 1_000_000) -> IntegerSet:
    """Resolve a set literal: ap:f,s | evens | odds | naturals | squares |
    primes[:N] | intervals:file.json | phi:file.csv | finite:a,b,c."""
    text = text.strip()
    if text in ("naturals", "all"):
        return ArithmeticProgression(1, 1, label="naturals")
    if text == "evens":
        return ArithmeticProgression(2, 2, label="evens")
    if text == "odds":
        return ArithmeticProgression(1, 2, label="odds")
    if text == "squares":
        return IncreasingGeneratorSet(lambda n: n * n, label="squares")
    if text == "primes":
        return PrimesSet(default_horizon)
    name, _, rest = text.partition(":")
    if name == "ap":
        try:
            first, stride = (int(p) for p in rest.split(","))
        except ValueError as exc:
            raise DomainError(f"bad ap literal {text!r}") from exc
        return ArithmeticProgression(first, stride)
    if name == "primes":
        return PrimesSet(int(rest))
    if name == "finite":
        return FiniteList(sorted(int(p) for p in rest.split(",")))
    if name == "intervals":
        with open(rest, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return IntervalUnion([tuple(iv) for iv in data], label=f"intervals:{rest}")
    if name == "phi":
        with open(rest, "r", encoding="utf-8") as fh:
            vals = [int(line.strip()) for line in fh if line.strip()]
        return IncreasingGeneratorSet(
            lambda k, v=vals: v[k - 1],
            label=f"phi:{rest}",
            max_terms=len(vals),
        )
    raise DomainError(f"unknown set literal {text!r}")
