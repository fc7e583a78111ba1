"""Partial sums of series and sub-series, limit traces, and probes.

Every "tends to zero" or "stays bounded below" assertion downstream is
represented as a :class:`Trace`: checkpointed values of a sequence plus the
sup/inf of the sequence over a tail window.  Divergence is never asserted;
:func:`divergence_probe` reports only threshold crossings within a budget.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional

import mpmath
import numpy as np

from .errors import (
    CapabilityError,
    ClassError,
    DegenerateError,
    DomainError,
    HintError,
    HorizonError,
)
from .intsets import IntegerSet
from .psi import PsiFunction, is_concave_on
from .summation import CHUNK, Neumaier, chunk_ranges

HINTS = (
    "none",
    "non_increasing",
    "c_over_psi_prime_non_increasing",
    "c_over_psi_prime_non_decreasing",
)

HINT_VERIFY_TERMS = 10_000


# =====================================================================
# Coefficient sequences
# =====================================================================

@dataclass(frozen=True)
class CoeffSequence:
    """A non-negative coefficient sequence n -> c_n.

    ``values_fn`` is an optional vectorized evaluator; ``exact_generator``
    returns c_n as a Fraction for exact-rational modes; ``ap_sum`` (when
    present) evaluates sum_{j=0}^{count-1} c(first + j*stride) as an mpmath
    float at the caller's working precision, enabling closed-form block
    sums over arithmetic progressions far beyond enumerable ranges.
    ``max_n`` bounds the domain for file-backed sequences.
    """

    label: str
    generator: Callable[[int], float]
    monotonicity_hint: str = "none"
    values_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    exact_generator: Optional[Callable[[int], Fraction]] = None
    ap_sum: Optional[Callable[[int, int, int], "mpmath.mpf"]] = None
    max_n: Optional[int] = None

    def values(self, ns: np.ndarray) -> np.ndarray:
        if self.max_n is not None and int(ns[-1]) > self.max_n:
            raise HorizonError(f"{self.label}: defined only up to n={self.max_n}")
        if self.values_fn is not None:
            return np.asarray(self.values_fn(ns), dtype=float)
        return np.fromiter(
            (float(self.generator(int(k))) for k in ns), dtype=float, count=len(ns)
        )

    def exact(self, n: int) -> Fraction:
        if self.exact_generator is None:
            raise CapabilityError(f"{self.label}: no exact rational generator")
        if self.max_n is not None and n > self.max_n:
            raise HorizonError(f"{self.label}: defined only up to n={self.max_n}")
        return self.exact_generator(n)

    def with_hint(self, hint: str) -> "CoeffSequence":
        if hint not in HINTS:
            raise HintError(f"unknown monotonicity hint {hint!r}")
        return replace(self, monotonicity_hint=hint)


def coeff_sequence(
    generator: Callable[[int], float],
    label: str,
    hint: str = "none",
    values_fn=None,
    exact_generator=None,
    ap_sum=None,
    max_n: Optional[int] = None,
    verify_terms: int = HINT_VERIFY_TERMS,
) -> CoeffSequence:
    """Build a coefficient sequence, verifying non-negativity and any plain
    monotonicity hint on the first ``verify_terms`` terms."""
    if hint not in HINTS:
        raise HintError(f"unknown monotonicity hint {hint!r}")
    c = CoeffSequence(
        label=label,
        generator=generator,
        monotonicity_hint=hint,
        values_fn=values_fn,
        exact_generator=exact_generator,
        ap_sum=ap_sum,
        max_n=max_n,
    )
    upto = min(verify_terms, max_n) if max_n else verify_terms
    vals = c.values(np.arange(1, upto + 1, dtype=np.int64))
    if np.any(vals < 0):
        k = int(np.argmax(vals < 0)) + 1
        raise DomainError(f"{label}: c_{k} = {vals[k-1]} is negative")
    if hint == "non_increasing":
        bad = np.diff(vals) > 1e-12 * np.maximum(1.0, np.abs(vals[:-1]))
        if np.any(bad):
            k = int(np.argmax(bad)) + 1
            raise HintError(f"{label}: non_increasing hint violated at n={k}")
    return c


def verify_ratio_hint(
    c: CoeffSequence,
    psi: PsiFunction,
    direction: str,
    upto: int = HINT_VERIFY_TERMS,
) -> None:
    """Check monotonicity of c_n / psi'(n) on a finite prefix.

    The declared hint is global; only finite evidence exists, so later
    violations surface lazily from the operations that consume the ratio.
    """
    if c.max_n is not None:
        upto = min(upto, c.max_n)
    ns = np.arange(1, upto + 1, dtype=np.int64)
    ratio = c.values(ns) / np.asarray(psi.derivative(ns.astype(float)), dtype=float)
    diffs = np.diff(ratio)
    slack = 1e-12 * np.maximum(1.0, np.abs(ratio[:-1]))
    if direction == "non_increasing":
        bad = diffs > slack
    elif direction == "non_decreasing":
        bad = diffs < -slack
    else:
        raise HintError(f"unknown ratio direction {direction!r}")
    if np.any(bad):
        k = int(np.argmax(bad)) + 1
        raise HintError(
            f"{c.label}/{psi.label}: ratio not {direction} at n={k}"
        )


def require_hint(c: CoeffSequence, hint: str) -> None:
    if c.monotonicity_hint != hint:
        raise HintError(
            f"{c.label}: operation requires declared hint {hint!r}, "
            f"found {c.monotonicity_hint!r}"
        )


# =====================================================================
# Traces
# =====================================================================

@dataclass(frozen=True)
class Trace:
    """Checkpointed values of a sequence with tail-window statistics.

    ``tail_sup`` is the max of |value|, ``tail_inf``/``tail_max`` the
    min/max of the signed value, over every index in
    [ceil(tail_fraction * horizon), horizon] (not just the checkpoints).
    """

    label: str
    points: tuple
    tail_sup: float
    tail_inf: float
    tail_max: float
    horizon: int
    tail_fraction: float

    @property
    def final(self) -> float:
        return self.points[-1][1]


class TraceBuilder:
    """Accumulates chunked (n, value) data into a Trace."""

    def __init__(self, label: str, horizon: int, tail_fraction: float = 0.5):
        if horizon < 1:
            raise DomainError("horizon must be >= 1")
        if not 0 < tail_fraction < 1:
            raise DomainError("tail_fraction must lie in (0, 1)")
        self.label = label
        self.horizon = horizon
        self.tail_fraction = tail_fraction
        self.window_start = max(1, int(math.ceil(horizon * tail_fraction)))
        self.sup = 0.0
        self.inf = math.inf
        self.max = -math.inf
        cps = []
        x = 1.0
        while x < horizon:
            c = int(round(x))
            if not cps or c > cps[-1]:
                cps.append(c)
            x *= 2.0
        if not cps or cps[-1] != horizon:
            cps.append(horizon)
        self._cps = cps
        self._values: dict[int, float] = {}

    def feed(self, ns: np.ndarray, values: np.ndarray) -> None:
        mask = ns >= self.window_start
        if mask.any():
            window = values[mask]
            self.sup = max(self.sup, float(np.max(np.abs(window))))
            self.inf = min(self.inf, float(np.min(window)))
            self.max = max(self.max, float(np.max(window)))
        lo, hi = int(ns[0]), int(ns[-1])
        i = bisect_left(self._cps, lo)
        while i < len(self._cps) and self._cps[i] <= hi:
            c = self._cps[i]
            self._values[c] = float(values[c - lo])
            i += 1

    def build(self) -> Trace:
        pts = tuple((c, self._values[c]) for c in self._cps if c in self._values)
        return Trace(
            label=self.label,
            points=pts,
            tail_sup=self.sup,
            tail_inf=self.inf,
            tail_max=self.max,
            horizon=self.horizon,
            tail_fraction=self.tail_fraction,
        )


# =====================================================================
# Operations
# =====================================================================

def subseries_partial_sums(
    c: CoeffSequence,
    A: IntegerSet,
    horizon: int,
    mode: str = "compensated",
    tail_fraction: float = 0.5,
) -> Trace:
    """Trace of sum_{k<=n, k in A} c_k.

    ``compensated`` accumulates in float with a Neumaier carry across fixed
    chunks; ``exact_rational`` accumulates Fractions (the oracle mode) and
    requires the sequence to declare exact rational values.
    """
    tb = TraceBuilder(f"subseries[{c.label} on {A.label}]", horizon, tail_fraction)
    if mode == "exact_rational":
        if c.exact_generator is None:
            raise CapabilityError(f"{c.label}: exact mode unavailable")
        acc = Fraction(0)
        for a, b in chunk_ranges(1, horizon, 4096):
            ind = A.indicator(a, b)
            out = np.empty(b - a + 1)
            for i, k in enumerate(range(a, b + 1)):
                if ind[i]:
                    acc += c.exact(k)
                out[i] = float(acc)
            tb.feed(np.arange(a, b + 1, dtype=np.int64), out)
        return tb.build()
    if mode != "compensated":
        raise DomainError(f"unknown mode {mode!r}")
    carry = Neumaier()
    for a, b in chunk_ranges(1, horizon):
        ns = np.arange(a, b + 1, dtype=np.int64)
        w = np.where(A.indicator(a, b), c.values(ns), 0.0)
        tb.feed(ns, carry.total + np.cumsum(w))
        carry.add(float(np.sum(w)))
    return tb.build()


def ratio_trace(
    c: CoeffSequence, A: IntegerSet, horizon: int, tail_fraction: float = 0.5
) -> Trace:
    """Trace of sum_{k<=n, k in A} c_k / sum_{k<=n} c_k (0 while the
    denominator is still zero)."""
    tb = TraceBuilder(f"ratio[{c.label} on {A.label}]", horizon, tail_fraction)
    num = Neumaier()
    den = Neumaier()
    for a, b in chunk_ranges(1, horizon):
        ns = np.arange(a, b + 1, dtype=np.int64)
        vals = c.values(ns)
        w = np.where(A.indicator(a, b), vals, 0.0)
        nums = num.total + np.cumsum(w)
        dens = den.total + np.cumsum(vals)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratios = np.where(dens > 0.0, nums / dens, 0.0)
        tb.feed(ns, ratios)
        num.add(float(np.sum(w)))
        den.add(float(np.sum(vals)))
    if den.total <= 0.0:
        raise DegenerateError(f"{c.label}: all coefficients vanish up to {horizon}")
    return tb.build()


def olivier_trace(
    c: CoeffSequence, psi: PsiFunction, horizon: int, tail_fraction: float = 0.5
) -> Trace:
    """Trace of (psi(n)/psi'(n)) * c_n, the weighted small-term criterion."""
    if horizon < 10:
        raise DomainError("horizon must be >= 10")
    tb = TraceBuilder(f"olivier[{c.label}, {psi.label}]", horizon, tail_fraction)
    for a, b in chunk_ranges(1, horizon):
        ns = np.arange(a, b + 1, dtype=np.int64)
        xs = ns.astype(float)
        vals = (
            np.asarray(psi.value(xs), dtype=float)
            / np.asarray(psi.derivative(xs), dtype=float)
            * c.values(ns)
        )
        tb.feed(ns, vals)
    return tb.build()


def necessity_trace(
    c: CoeffSequence,
    A: IntegerSet,
    psi: PsiFunction,
    horizon: int,
    tail_fraction: float = 0.5,
) -> Trace:
    """Trace of A_psi(n) * c_n / psi'(n), where A_psi is the weighted count.

    This quantity tends to zero whenever the sub-series over A converges
    and c_n/psi'(n) is non-increasing; the declared hint is required and
    its prefix is re-verified against this psi.
    """
    require_hint(c, "c_over_psi_prime_non_increasing")
    verify_ratio_hint(c, psi, "non_increasing", upto=min(horizon, HINT_VERIFY_TERMS))
    tb = TraceBuilder(f"necessity[{c.label} on {A.label}, {psi.label}]",
                      horizon, tail_fraction)
    acc = Neumaier()
    for a, b in chunk_ranges(1, horizon):
        ns = np.arange(a, b + 1, dtype=np.int64)
        xs = ns.astype(float)
        d = np.asarray(psi.derivative(xs), dtype=float)
        w = np.where(A.indicator(a, b), d, 0.0)
        apsi = acc.total + np.cumsum(w)
        tb.feed(ns, apsi * c.values(ns) / d)
        acc.add(float(np.sum(w)))
    return tb.build()


@dataclass(frozen=True)
class AbelCheck:
    """Both sides of the partial-summation identity, computed independently."""

    lhs: float
    rhs: float
    abs_gap: float
    exact: bool


def abel_identity_check(
    c: CoeffSequence,
    A: IntegerSet,
    psi: PsiFunction,
    n: int,
    mode: str = "compensated",
) -> AbelCheck:
    """Check sum_{k<=n} chi_A(k) c_k against its summation-by-parts form

        c_n A_psi(n)/psi'(n) + sum_{k<n} A_psi(k) (c_k/psi'(k) - c_{k+1}/psi'(k+1)).

    In exact mode both sides are Fractions and the gap must be exactly 0.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    if mode == "exact_rational":
        if c.exact_generator is None or psi.exact_prime is None:
            raise CapabilityError("exact mode needs rational c and psi'")
        chi = [bool(x) for x in A.indicator(1, n)]
        cs = [c.exact(k) for k in range(1, n + 1)]
        ds = [psi.exact_prime(k) for k in range(1, n + 1)]
        lhs = sum((cs[k] for k in range(n) if chi[k]), Fraction(0))
        apsi = Fraction(0)
        vsum = Fraction(0)
        for k in range(1, n):
            if chi[k - 1]:
                apsi += ds[k - 1]
            vsum += apsi * (cs[k - 1] / ds[k - 1] - cs[k] / ds[k])
        if chi[n - 1]:
            apsi += ds[n - 1]
        rhs = cs[n - 1] * apsi / ds[n - 1] + vsum
        gap = abs(lhs - rhs)
        return AbelCheck(lhs=float(lhs), rhs=float(rhs), abs_gap=float(gap),
                         exact=gap == 0)
    chi = A.indicator(1, n)
    ns = np.arange(1, n + 1, dtype=np.int64)
    cs = c.values(ns)
    ds = np.asarray(psi.derivative(ns.astype(float)), dtype=float)
    lhs = math.fsum(float(cs[k]) for k in range(n) if chi[k])
    ratio = cs / ds
    apsi = np.cumsum(np.where(chi, ds, 0.0))
    vterms = apsi[:-1] * (ratio[:-1] - ratio[1:])
    rhs = float(cs[-1]) * float(apsi[-1]) / float(ds[-1]) + math.fsum(
        float(v) for v in vterms
    )
    return AbelCheck(lhs=lhs, rhs=rhs, abs_gap=abs(lhs - rhs), exact=False)


def condition_trace(
    c: CoeffSequence,
    psi: PsiFunction,
    horizon: int,
    which: str,
    tail_fraction: float = 0.5,
    class_grid: Optional[int] = None,
) -> Trace:
    """Trace of the lower-bound condition matching the weight's class:
    psi(n) c_n for concave weights, (psi(n)/psi'(n)) c_n for convex ones.
    ``tail_inf`` is the window minimum, the finite-horizon liminf estimate.
    """
    from .psi import classify

    grid = class_grid or max(16, min(horizon, 100_000))
    if which == "concave":
        if not is_concave_on(psi, grid):
            raise ClassError(f"{psi.label}: not concave on the grid")
    elif which == "convex":
        if not classify(psi, grid).in_D2:
            raise ClassError(f"{psi.label}: not a ratio-regular convex weight")
    else:
        raise DomainError(f"unknown condition kind {which!r}")
    tb = TraceBuilder(f"condition[{which}, {c.label}, {psi.label}]",
                      horizon, tail_fraction)
    for a, b in chunk_ranges(1, horizon):
        ns = np.arange(a, b + 1, dtype=np.int64)
        xs = ns.astype(float)
        v = np.asarray(psi.value(xs), dtype=float)
        if which == "convex":
            v = v / np.asarray(psi.derivative(xs), dtype=float)
        tb.feed(ns, v * c.values(ns))
    return tb.build()


@dataclass(frozen=True)
class Verdict:
    """Finite-budget stand-in for a divergence assertion.

    ``reached_threshold`` certifies the partial sum strictly exceeded the
    threshold at ``at_n``; ``inconclusive`` claims nothing.
    """

    outcome: str  # "reached_threshold" | "inconclusive"
    at_n: Optional[int]
    budget_spent: int
    partial_sum: float

    @property
    def reached(self) -> bool:
        return self.outcome == "reached_threshold"


def divergence_probe(
    c: CoeffSequence, A: IntegerSet, threshold: float, budget: int
) -> Verdict:
    """Scan partial sums of the sub-series for a strict threshold crossing."""
    if threshold <= 0:
        raise DomainError("threshold must be positive")
    acc = Neumaier()
    scanned = 0
    for a, b in chunk_ranges(1, budget):
        ns = np.arange(a, b + 1, dtype=np.int64)
        w = np.where(A.indicator(a, b), c.values(ns), 0.0)
        sums = acc.total + np.cumsum(w)
        over = sums > threshold
        if over.any():
            i = int(np.argmax(over))
            return Verdict(
                outcome="reached_threshold",
                at_n=int(ns[i]),
                budget_spent=scanned + i + 1,
                partial_sum=float(sums[i]),
            )
        acc.add(float(np.sum(w)))
        scanned += len(ns)
    return Verdict(
        outcome="inconclusive",
        at_n=None,
        budget_spent=scanned,
        partial_sum=acc.total,
    )


# =====================================================================
# Sequence literals
# =====================================================================

def _recip() -> CoeffSequence:
    def ap_sum(first: int, stride: int, count: int):
        # sum_{j<count} 1/(first + j*stride) via digamma differences
        a = mpmath.mpf(first) / stride
        return (mpmath.digamma(a + count) - mpmath.digamma(a)) / stride

    return coeff_sequence(
        generator=lambda n: 1.0 / n,
        label="recip",
        hint="non_increasing",
        values_fn=lambda ns: 1.0 / ns.astype(float),
        exact_generator=lambda n: Fraction(1, n),
        ap_sum=ap_sum,
    )


def _recip_pow(a: float) -> CoeffSequence:
    if a <= 0:
        raise DomainError("recip-pow exponent must be positive")
    exact = None
    if float(a).is_integer():
        ia = int(a)
        exact = lambda n: Fraction(1, n**ia)

    def ap_sum(first: int, stride: int, count: int, s=a):
        if s == 1.0:
            base = mpmath.mpf(first) / stride
            return (mpmath.digamma(base + count) - mpmath.digamma(base)) / stride
        base = mpmath.mpf(first) / stride
        z = mpmath.zeta(s, base) - mpmath.zeta(s, base + count)
        return z / mpmath.mpf(stride) ** s

    return coeff_sequence(
        generator=lambda n, p=a: n ** (-p),
        label=f"recip-pow:{a:g}",
        hint="non_increasing",
        values_fn=lambda ns, p=a: ns.astype(float) ** (-p),
        exact_generator=exact,
        ap_sum=ap_sum,
    )


def _recip_logsq() -> CoeffSequence:
    def vec(ns):
        xs = ns.astype(float)
        return 1.0 / (xs * np.log(xs + 1.0) ** 2)

    return coeff_sequence(
        generator=lambda n: 1.0 / (n * math.log(n + 1.0) ** 2),
        label="recip-logsq",
        hint="non_increasing",
        values_fn=vec,
    )


def _const(v: float, raw: str = "") -> CoeffSequence:
    if v < 0:
        raise DomainError("constant sequences must be non-negative")
    frac = Fraction(raw) if raw else Fraction(str(v))
    return coeff_sequence(
        generator=lambda n: v,
        label=f"const:{v:g}",
        hint="non_increasing",
        values_fn=lambda ns: np.full(len(ns), float(v)),
        exact_generator=lambda n: frac,
        ap_sum=lambda first, stride, count: mpmath.mpf(count) * v,
    )


def _from_file(path: str) -> CoeffSequence:
    with open(path, "r", encoding="utf-8") as fh:
        vals = [float(line.strip()) for line in fh if line.strip()]
    if not vals:
        raise DomainError(f"{path}: empty coefficient file")
    arr = np.asarray(vals, dtype=float)

    def vec(ns, a=arr):
        return a[ns - 1]

    return coeff_sequence(
        generator=lambda n, a=arr: float(a[n - 1]),
        label=f"file:{path}",
        values_fn=vec,
        max_n=len(vals),
    )


def parse_coeff(text: str) -> CoeffSequence:
    """Resolve a sequence literal: recip | recip-pow:a | recip-logsq |
    const:v | file:path.csv."""
    text = text.strip()
    if text == "recip":
        return _recip()
    if text == "recip-logsq":
        return _recip_logsq()
    name, _, rest = text.partition(":")
    if name == "recip-pow":
        return _recip_pow(float(rest))
    if name == "const":
        if "/" in rest:
            frac = Fraction(rest)
            return _const(float(frac), raw=rest)
        return _const(float(rest))
    if name == "file":
        return _from_file(rest)
    raise DomainError(f"unknown sequence literal {text!r}")


def coeff_catalog() -> dict:
    return {
        "recip": "1/n",
        "recip-pow:<a>": "1/n^a",
        "recip-logsq": "1/(n log^2(n+1))",
        "const:<v>": "constant v",
        "file:<path>": "one coefficient per line",
    }
