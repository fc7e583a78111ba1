"""Sub-signed series: sign decompositions, the signed partial-summation
identity, the associated regular (Toeplitz-type) transform, and weighted
comparison means.

A sign sequence takes values in {-1, 0, +1} and splits the integers into
the positive-sign set A, the negative-sign set B, and the zero set C.  The
signed weighted count sum_{k<=n} m_k psi'(k) equals A_psi(n) - B_psi(n),
which is what the decay traces below monitor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from .errors import (
    CapabilityError,
    ConditionError,
    DivergencePrereqError,
    DomainError,
    HintError,
    ZeroCoefficientError,
)
from .intsets import IntegerSet, PredicateSet
from .psi import PsiFunction
from .series import (
    CoeffSequence,
    HINT_VERIFY_TERMS,
    Trace,
    TraceBuilder,
    require_hint,
    verify_ratio_hint,
)
from .summation import Neumaier, chunk_ranges


# =====================================================================
# Sign sequences
# =====================================================================

@dataclass(frozen=True)
class SignSequence:
    """n -> m_n in {-1, 0, +1}; every access validates the range."""

    label: str
    generator: Callable[[int], int]
    values_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def values(self, ns: np.ndarray) -> np.ndarray:
        if self.values_fn is not None:
            out = np.asarray(self.values_fn(ns), dtype=np.int64)
        else:
            out = np.fromiter(
                (int(self.generator(int(k))) for k in ns),
                dtype=np.int64,
                count=len(ns),
            )
        bad = np.abs(out) > 1
        if bad.any():
            k = int(ns[int(np.argmax(bad))])
            raise ValueError(f"{self.label}: m_{k} outside {{-1, 0, 1}}")
        return out


@dataclass(frozen=True)
class ABDecomposition:
    """The three sets induced by a sign sequence up to a scan horizon."""

    set_a: IntegerSet
    set_b: IntegerSet
    set_c: IntegerSet
    horizon: int


def decompose(m: SignSequence, horizon: int) -> ABDecomposition:
    """Split signs into predicate-backed sets; validates the full prefix."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    for a, b in chunk_ranges(1, horizon):
        m.values(np.arange(a, b + 1, dtype=np.int64))  # range validation
    def mk(target: int, name: str) -> PredicateSet:
        return PredicateSet(
            member_fn=lambda n, t=target: int(m.generator(n)) == t,
            scan_horizon=horizon,
            label=f"{m.label}:{name}",
            values_fn=lambda ns, t=target: m.values(ns) == t,
        )

    return ABDecomposition(
        set_a=mk(1, "plus"),
        set_b=mk(-1, "minus"),
        set_c=mk(0, "zero"),
        horizon=horizon,
    )


def subsigned_partial_sums(
    m: SignSequence,
    c: CoeffSequence,
    horizon: int,
    tail_fraction: float = 0.5,
) -> Trace:
    """Trace of sum_{k<=n} m_k c_k (compensated)."""
    tb = TraceBuilder(f"subsigned[{m.label}, {c.label}]", horizon, tail_fraction)
    acc = Neumaier()
    for a, b in chunk_ranges(1, horizon):
        ns = np.arange(a, b + 1, dtype=np.int64)
        w = m.values(ns) * c.values(ns)
        tb.feed(ns, acc.total + np.cumsum(w))
        acc.add(float(np.sum(w)))
    return tb.build()


# =====================================================================
# Signed partial-summation identity
# =====================================================================

@dataclass(frozen=True)
class SignedAbelCheck:
    lhs: float
    rhs: float
    abs_gap: float
    exact: bool


def abel_signed_identity_check(
    m: SignSequence,
    c: CoeffSequence,
    psi: PsiFunction,
    n: int,
    mode: str = "compensated",
) -> SignedAbelCheck:
    """Check P_n = sum_{k<=n} m_k c_k against its transform representation

        P_n = (S_n/psi'(n)) c_n
              + (c_n/psi'(n)) sum_{k<n} (psi'(k+1)/c_{k+1} - psi'(k)/c_k) P_k,

    where S_n = sum_{k<=n} m_k psi'(k) is the signed weighted count.
    Coefficients must be non-vanishing up to n.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    ns = np.arange(1, n + 1, dtype=np.int64)
    signs = m.values(ns)
    if mode == "exact_rational":
        if c.exact_generator is None or psi.exact_prime is None:
            raise CapabilityError("exact mode needs rational c and psi'")
        cs = [c.exact(k) for k in range(1, n + 1)]
        if any(x == 0 for x in cs):
            raise ZeroCoefficientError(f"{c.label}: zero coefficient below n={n}")
        ds = [psi.exact_prime(k) for k in range(1, n + 1)]
        P = Fraction(0)
        parts = []
        for k in range(n):
            P += int(signs[k]) * cs[k]
            parts.append(P)
        lhs = parts[-1]
        signed_count = sum(
            (int(signs[k]) * ds[k] for k in range(n)), Fraction(0)
        )
        tsum = Fraction(0)
        for k in range(1, n):
            tsum += (ds[k] / cs[k] - ds[k - 1] / cs[k - 1]) * parts[k - 1]
        rhs = signed_count / ds[-1] * cs[-1] + cs[-1] / ds[-1] * tsum
        gap = abs(lhs - rhs)
        return SignedAbelCheck(
            lhs=float(lhs), rhs=float(rhs), abs_gap=float(gap), exact=gap == 0
        )
    cs = c.values(ns)
    if np.any(cs == 0.0):
        k = int(ns[int(np.argmax(cs == 0.0))])
        raise ZeroCoefficientError(f"{c.label}: c_{k} = 0")
    ds = np.asarray(psi.derivative(ns.astype(float)), dtype=float)
    terms = signs * cs
    lhs = math.fsum(float(t) for t in terms)
    parts = np.cumsum(terms)
    inv = ds / cs
    tsum = math.fsum(float((inv[k] - inv[k - 1]) * parts[k - 1]) for k in range(1, n))
    signed_count = math.fsum(float(signs[k] * ds[k]) for k in range(n))
    rhs = signed_count / float(ds[-1]) * float(cs[-1]) + float(cs[-1]) / float(
        ds[-1]
    ) * tsum
    return SignedAbelCheck(lhs=lhs, rhs=rhs, abs_gap=abs(lhs - rhs), exact=False)


# =====================================================================
# Regular transform rows
# =====================================================================

@dataclass(frozen=True)
class ToeplitzRow:
    """One transform row: entries for k < n, zero elsewhere."""

    n: int
    row: np.ndarray
    row_sum: float
    closed_form_sum: float


def toeplitz_rows(c: CoeffSequence, psi: PsiFunction, n: int) -> ToeplitzRow:
    """Row n of the transform induced by the ratio c/psi':

        c_{n,k} = (c_n/psi'(n)) (psi'(k+1)/c_{k+1} - psi'(k)/c_k),  k < n.

    Requires the declared non-increasing ratio hint (which makes entries
    non-negative).  The explicitly summed row is compared against the
    telescoped closed form 1 - (psi'(1)/c_1)(c_n/psi'(n)).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    require_hint(c, "c_over_psi_prime_non_increasing")
    verify_ratio_hint(c, psi, "non_increasing", upto=min(n, HINT_VERIFY_TERMS))
    ns = np.arange(1, n + 1, dtype=np.int64)
    cs = c.values(ns)
    ds = np.asarray(psi.derivative(ns.astype(float)), dtype=float)
    inv = ds / cs
    row = np.zeros(n)
    if n > 1:
        row[: n - 1] = (cs[-1] / ds[-1]) * np.diff(inv)
    row_sum = math.fsum(float(x) for x in row)
    closed = 1.0 - float(inv[0]) * float(cs[-1]) / float(ds[-1])
    return ToeplitzRow(n=n, row=row, row_sum=row_sum, closed_form_sum=closed)


def toeplitz_row_sums_batch(
    c: CoeffSequence, psi: PsiFunction, n_max: int
) -> tuple[np.ndarray, np.ndarray]:
    """(summed, closed-form) row sums for every n <= n_max.

    The summed side accumulates the explicitly formed row entries, the
    closed form is evaluated independently.
    """
    require_hint(c, "c_over_psi_prime_non_increasing")
    verify_ratio_hint(c, psi, "non_increasing", upto=min(n_max, HINT_VERIFY_TERMS))
    ns = np.arange(1, n_max + 1, dtype=np.int64)
    cs = c.values(ns)
    ds = np.asarray(psi.derivative(ns.astype(float)), dtype=float)
    inv = ds / cs
    diffs = np.diff(inv)
    prefix = np.concatenate(([0.0], np.cumsum(diffs)))
    summed = (cs / ds) * prefix
    closed = 1.0 - float(inv[0]) * cs / ds
    return summed, closed


@dataclass(frozen=True)
class ToeplitzTransformReport:
    y_trace: Trace
    x_tail_min: float
    x_tail_max: float
    sandwich_ok: bool
    slack: float


def toeplitz_transform(
    c: CoeffSequence,
    psi: PsiFunction,
    x_fn: Callable[[np.ndarray], np.ndarray],
    horizon: int,
    tail_fraction: float = 0.5,
    slack: float = 0.02,
) -> ToeplitzTransformReport:
    """y_n = sum_{k<n} c_{n,k} x_k for the rows above, traced incrementally.

    Row entries must be non-negative (ConditionError otherwise).  The tail
    min/max of x and y exhibit the liminf/limsup sandwich empirically; an
    out-of-order pair beyond ``slack`` flags ``sandwich_ok = False`` rather
    than raising, since finite horizons cannot certify the limits.
    """
    require_hint(c, "c_over_psi_prime_non_increasing")
    verify_ratio_hint(c, psi, "non_increasing", upto=min(horizon, HINT_VERIFY_TERMS))
    tb = TraceBuilder(f"toeplitz[{c.label}, {psi.label}]", horizon, tail_fraction)
    tb.feed(np.array([1], dtype=np.int64), np.array([0.0]))  # empty row at n=1
    x_lo, x_hi = math.inf, -math.inf
    w0 = tb.window_start
    acc = Neumaier()
    for a, b in chunk_ranges(1, horizon - 1):
        ks = np.arange(a, b + 1, dtype=np.int64)
        cs = c.values(ks)
        csp = c.values(ks + 1)
        ds = np.asarray(psi.derivative(ks.astype(float)), dtype=float)
        dsp = np.asarray(psi.derivative(ks.astype(float) + 1.0), dtype=float)
        d = dsp / csp - ds / cs
        if np.any(d < -1e-12 * np.maximum(1.0, np.abs(ds / cs))):
            k = int(ks[int(np.argmax(d < 0))])
            raise ConditionError(f"negative transform entry at k={k}")
        xs = np.asarray(x_fn(ks), dtype=float)
        win = ks >= w0
        if win.any():
            x_lo = min(x_lo, float(np.min(xs[win])))
            x_hi = max(x_hi, float(np.max(xs[win])))
        tvals = acc.total + np.cumsum(d * xs)
        y = (csp / dsp) * tvals
        tb.feed(ks + 1, y)
        acc.add(float(np.sum(d * xs)))
    y_trace = tb.build()
    ok = (
        x_lo - slack <= y_trace.tail_inf
        and y_trace.tail_max <= x_hi + slack
    )
    return ToeplitzTransformReport(
        y_trace=y_trace,
        x_tail_min=x_lo,
        x_tail_max=x_hi,
        sandwich_ok=ok,
        slack=slack,
    )


# =====================================================================
# Weighted comparison means
# =====================================================================

@dataclass(frozen=True)
class RajagopalReport:
    sigma_a: Trace
    sigma_b: Trace
    a_total: float
    b_total: float
    sandwich_ok: bool
    slack: float


def rajagopal_means(
    s: Union[IntegerSet, Callable[[np.ndarray], np.ndarray]],
    a: CoeffSequence,
    b: CoeffSequence,
    horizon: int,
    threshold: float = 1.0,
    tail_fraction: float = 0.5,
    slack: float = 0.02,
) -> RajagopalReport:
    """Weighted means sigma(s, a)_n = sum(a_k s_k)/sum(a_k) under two weight
    systems whose ratio a/b is non-increasing.

    Both weight totals must exceed ``threshold`` within the horizon (the
    divergence prerequisite).  The mean under the slower weights is
    sandwiched by the mean under the faster ones; the tail windows report
    this empirically, with violations beyond ``slack`` flagged.
    """
    if isinstance(s, IntegerSet):
        sset = s
        s_fn = lambda ns: sset.indicator(int(ns[0]), int(ns[-1])).astype(float)
        s_label = sset.label
    else:
        s_fn = s
        s_label = "s"
    ns_check = np.arange(1, min(horizon, HINT_VERIFY_TERMS) + 1, dtype=np.int64)
    ratio = a.values(ns_check) / b.values(ns_check)
    if np.any(np.diff(ratio) > 1e-12 * np.maximum(1.0, np.abs(ratio[:-1]))):
        k = int(np.argmax(np.diff(ratio) > 0)) + 1
        raise HintError(f"{a.label}/{b.label}: weight ratio not non-increasing at n={k}")
    tb_a = TraceBuilder(f"mean[{s_label}; {a.label}]", horizon, tail_fraction)
    tb_b = TraceBuilder(f"mean[{s_label}; {b.label}]", horizon, tail_fraction)
    num_a, den_a = Neumaier(), Neumaier()
    num_b, den_b = Neumaier(), Neumaier()
    for lo, hi in chunk_ranges(1, horizon):
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        sv = np.asarray(s_fn(ns), dtype=float)
        av = a.values(ns)
        bv = b.values(ns)
        na = num_a.total + np.cumsum(av * sv)
        da = den_a.total + np.cumsum(av)
        nb = num_b.total + np.cumsum(bv * sv)
        db = den_b.total + np.cumsum(bv)
        with np.errstate(invalid="ignore", divide="ignore"):
            tb_a.feed(ns, np.where(da > 0, na / da, 0.0))
            tb_b.feed(ns, np.where(db > 0, nb / db, 0.0))
        num_a.add(float(np.sum(av * sv)))
        den_a.add(float(np.sum(av)))
        num_b.add(float(np.sum(bv * sv)))
        den_b.add(float(np.sum(bv)))
    if den_a.total <= threshold or den_b.total <= threshold:
        raise DivergencePrereqError(
            f"weight totals {den_a.total:.3g}/{den_b.total:.3g} did not exceed "
            f"{threshold} within horizon {horizon}"
        )
    sa, sb = tb_a.build(), tb_b.build()
    ok = sb.tail_inf <= sa.tail_inf + slack and sa.tail_max <= sb.tail_max + slack
    return RajagopalReport(
        sigma_a=sa,
        sigma_b=sb,
        a_total=den_a.total,
        b_total=den_b.total,
        sandwich_ok=ok,
        slack=slack,
    )


# =====================================================================
# Signed decay traces
# =====================================================================

@dataclass(frozen=True)
class SignedDecayReport:
    """Decay traces for the signed weighted count S_n = A_psi(n) - B_psi(n).

    ``necessity`` traces S_n c_n / psi'(n); ``density_gap`` traces
    S_n / psi(n).  The report records the caller-declared monotonicity
    direction of c/psi'; it does not decide convergence of the sub-signed
    series itself.
    """

    necessity: Trace
    density_gap: Trace
    ratio_direction: str


def signed_decay_traces(
    m: SignSequence,
    c: CoeffSequence,
    psi: PsiFunction,
    horizon: int,
    tail_fraction: float = 0.5,
) -> SignedDecayReport:
    if c.monotonicity_hint == "c_over_psi_prime_non_increasing":
        direction = "non_increasing"
    elif c.monotonicity_hint == "c_over_psi_prime_non_decreasing":
        direction = "non_decreasing"
    else:
        raise HintError(
            f"{c.label}: declare a c/psi' monotonicity hint to select the "
            "expected conclusion"
        )
    verify_ratio_hint(c, psi, direction, upto=min(horizon, HINT_VERIFY_TERMS))
    tb_nc = TraceBuilder(f"signed-necessity[{m.label}, {c.label}, {psi.label}]",
                         horizon, tail_fraction)
    tb_gap = TraceBuilder(f"density-gap[{m.label}, {psi.label}]",
                          horizon, tail_fraction)
    acc = Neumaier()
    for a, b in chunk_ranges(1, horizon):
        ns = np.arange(a, b + 1, dtype=np.int64)
        xs = ns.astype(float)
        ds = np.asarray(psi.derivative(xs), dtype=float)
        w = m.values(ns) * ds
        signed = acc.total + np.cumsum(w)
        tb_nc.feed(ns, signed * c.values(ns) / ds)
        tb_gap.feed(ns, signed / np.asarray(psi.value(xs), dtype=float))
        acc.add(float(np.sum(w)))
    return SignedDecayReport(
        necessity=tb_nc.build(),
        density_gap=tb_gap.build(),
        ratio_direction=direction,
    )


# =====================================================================
# Sign literals
# =====================================================================

def parse_sign(text: str, default_horizon: int = 1_000_000) -> SignSequence:
    """Resolve a sign literal: alt | alt-on:<set> | file:path.csv."""
    from .intsets import parse_set

    text = text.strip()
    if text == "alt":
        return SignSequence(
            label="alt",
            generator=lambda n: 1 if n % 2 == 1 else -1,
            values_fn=lambda ns: np.where(ns % 2 == 1, 1, -1),
        )
    name, _, rest = text.partition(":")
    if name == "alt-on":
        base = parse_set(rest, default_horizon)

        def gen(n: int, s=base) -> int:
            if not s.member(n):
                return 0
            return 1 if s.count(n) % 2 == 1 else -1

        def vec(ns: np.ndarray, s=base) -> np.ndarray:
            lo, hi = int(ns[0]), int(ns[-1])
            ind = s.indicator(lo, hi)
            base_count = s.count(lo - 1) if lo > 1 else 0
            ranks = base_count + np.cumsum(ind)
            return np.where(ind, np.where(ranks % 2 == 1, 1, -1), 0)

        return SignSequence(label=f"alt-on:{rest}", generator=gen, values_fn=vec)
    if name == "file":
        with open(rest, "r", encoding="utf-8") as fh:
            vals = [int(line.strip()) for line in fh if line.strip()]
        arr = np.asarray(vals, dtype=np.int64)

        def gen_f(n: int, a=arr) -> int:
            if n > len(a):
                raise DomainError(f"sign file defines only {len(a)} terms")
            return int(a[n - 1])

        return SignSequence(
            label=f"file:{rest}",
            generator=gen_f,
            values_fn=lambda ns, a=arr: a[ns - 1],
        )
    raise DomainError(f"unknown sign literal {text!r}")


def sign_catalog() -> dict:
    return {
        "alt": "(-1)^(n+1)",
        "alt-on:<set>": "alternating on the set's elements by rank, 0 elsewhere",
        "file:<path>": "one of -1/0/1 per line",
    }
