"""Executable witness constructions.

Three constructive existence arguments are made computable here:

* a coefficient sequence, built block-wise from a set of zero lower
  weighted density, whose full series diverges while the sub-series over
  the set converges (select_nk / hamming_coeffs / verify_hamming);
* a sparse set grown down a binary tree of arithmetic progressions on
  which a given divergent series still diverges (auerbach_build /
  auerbach_verify);
* the plateau-coefficient example with blocks [n^n, a*n^n] showing upper
  density delta with convergent sub-series, and its weighted sharpness
  variant with the x/loglog(x+e^e) weight (salat_example / verify).

Construction endpoints can be astronomically large (the tree stages grow
like exp(k 2^k)), so block sums over arithmetic progressions are evaluated
through the coefficient sequence's closed-form capability at adaptive
mpmath precision, and all endpoint arithmetic stays in exact integers.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import mpmath
import numpy as np

from .constants import e_minus_one_bounds, pi_sq_over_6
from .errors import (
    BlockCapExceeded,
    BudgetExhausted,
    ClassError,
    DomainError,
    HintError,
    StageBudgetExhausted,
)
from .intsets import (
    APSegmentSet,
    ArithmeticProgression,
    IncreasingGeneratorSet,
    IntegerSet,
    IntervalUnion,
    as_term_function,
)
from .psi import EE, PsiFunction, classify, get_psi, is_concave_on
from .series import CoeffSequence, Trace, TraceBuilder, coeff_sequence
from .summation import Neumaier, chunk_ranges

PhiLike = Union[IncreasingGeneratorSet, ArithmeticProgression, Callable[[int], int]]


def _phi_fn(phi: PhiLike) -> tuple[Callable[[int], int], str]:
    return as_term_function(phi)


# =====================================================================
# Block-boundary selection for the sparse-set coefficient witness
# =====================================================================

def select_nk(
    phi: PhiLike,
    psi: PsiFunction,
    k_max: int,
    search_budget: int = 10_000_000,
) -> list[int]:
    """Greedily select boundaries n_0 = 0 < n_1 < ... < n_k_max such that
    consecutive blocks satisfy, with A(n) = sum_{i<=n} psi'(phi(i)) and
    v(n) = psi(phi(n)) (phi(0) taken as 0):

    * ratio condition:  v(n_{k+1}) - v(n_k) >= 2^k (A(n_{k+1}) - A(n_k)),
    * gap monotonicity: A-gaps are non-decreasing from block to block.

    Each candidate is the smallest admissible index, so the output is
    canonical.  Raises BudgetExhausted when ``search_budget`` indices were
    scanned without completing; a set of positive lower weighted density
    never completes, which is the intended signal.
    """
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    term, label = _phi_fn(phi)
    if not is_concave_on(psi, 100_000):
        raise ClassError(f"{psi.label}: boundary selection requires a concave weight")
    v0 = float(psi.value(0.0))
    if not math.isfinite(v0):
        raise DomainError(f"{psi.label}: psi(0) must be finite for the 0 convention")

    boundaries = [0]
    acc = Neumaier()  # A(n) incrementally
    a_at = [0.0]      # A at boundaries
    v_at = [v0]       # v at boundaries
    n = 0
    scanned = 0
    for k in range(k_max):
        target = 2.0 ** k
        prev_gap = a_at[-1] - a_at[-2] if k >= 1 else None
        while True:
            n += 1
            scanned += 1
            if scanned > search_budget:
                raise BudgetExhausted(
                    k_reached=k,
                    boundaries=boundaries,
                    message=(
                        f"{label}: no admissible boundary for block {k} within "
                        f"{search_budget} scanned indices"
                    ),
                )
            pv = float(term(n))
            acc.add(float(psi.derivative(pv)))
            a_gap = acc.total - a_at[-1]
            if prev_gap is not None and a_gap < prev_gap:
                continue
            if float(psi.value(pv)) - v_at[-1] >= target * a_gap:
                boundaries.append(n)
                a_at.append(acc.total)
                v_at.append(float(psi.value(pv)))
                break
    return boundaries


def check_nk(phi: PhiLike, psi: PsiFunction, nk: list[int]) -> bool:
    """Independent re-verification of the two block conditions, using
    per-block exact-rounded sums rather than the selector's running state."""
    term, _ = _phi_fn(phi)
    if nk[0] != 0 or any(b <= a for a, b in zip(nk, nk[1:])):
        return False
    gaps = []
    v_at = [float(psi.value(0.0))]
    for a, b in zip(nk, nk[1:]):
        gaps.append(math.fsum(float(psi.derivative(float(term(i))))
                              for i in range(a + 1, b + 1)))
        v_at.append(float(psi.value(float(term(b)))))
    for k, gap in enumerate(gaps):
        if v_at[k + 1] - v_at[k] < 2.0 ** k * gap:
            return False
    return all(g2 >= g1 for g1, g2 in zip(gaps, gaps[1:]))


# =====================================================================
# The block-wise coefficient witness
# =====================================================================

@dataclass(frozen=True)
class HammingWitness:
    """Block-wise coefficients c_m = psi'(m) / D_k on (phi(n_k), phi(n_{k+1})],
    with D_k = 2^k * (weighted gap of block k).  The ratio c/psi' is the
    step sequence 1/D_k, non-increasing because the denominators grow."""

    phi_label: str
    psi_label: str
    nk: tuple
    phi_at_nk: tuple
    apsi_at_nk: tuple
    block_denominators: tuple

    @property
    def max_m(self) -> int:
        return self.phi_at_nk[-1]

    def block_index(self, m: int) -> int:
        if not 1 <= m <= self.max_m:
            raise DomainError(f"witness defined for 1 <= m <= {self.max_m}")
        return bisect_right(self.phi_at_nk, m - 1) - 1

    def coeffs(self) -> CoeffSequence:
        psi = get_psi(self.psi_label)
        bounds = np.asarray(self.phi_at_nk, dtype=np.int64)
        dens = np.asarray(self.block_denominators, dtype=float)

        def vec(ns: np.ndarray) -> np.ndarray:
            idx = np.searchsorted(bounds, ns - 1, side="right") - 1
            return np.asarray(psi.derivative(ns.astype(float)), dtype=float) / dens[idx]

        return coeff_sequence(
            generator=lambda m: float(psi.derivative(float(m)))
            / self.block_denominators[self.block_index(m)],
            label=f"hamming[{self.phi_label}, {self.psi_label}]",
            hint="c_over_psi_prime_non_increasing",
            values_fn=vec,
            max_n=self.max_m,
        )


def hamming_coeffs(phi: PhiLike, psi: PsiFunction, nk: list[int]) -> HammingWitness:
    """Assemble the witness coefficients from selected boundaries."""
    term, label = _phi_fn(phi)
    if len(nk) < 2:
        raise DomainError("need at least two boundaries")
    phi_at = [0] + [int(term(n)) for n in nk[1:]]
    apsi = [0.0]
    for a, b in zip(nk, nk[1:]):
        block = math.fsum(
            float(psi.derivative(float(term(i)))) for i in range(a + 1, b + 1)
        )
        apsi.append(apsi[-1] + block)
    dens = [
        2.0 ** k * (apsi[k + 1] - apsi[k]) for k in range(len(nk) - 1)
    ]
    if any(d2 < d1 * (1 - 1e-12) for d1, d2 in zip(dens, dens[1:])):
        raise HintError("block denominators must be non-decreasing")
    return HammingWitness(
        phi_label=label,
        psi_label=psi.label,
        nk=tuple(nk),
        phi_at_nk=tuple(phi_at),
        apsi_at_nk=tuple(apsi),
        block_denominators=tuple(dens),
    )


@dataclass(frozen=True)
class HammingReport:
    full_trace: Trace
    block_full_sums: tuple
    block_sub_sums: tuple
    subseries_total: float
    sub_bound: float           # first block sum + 2 (geometric tail bound)
    sub_bound_ok: bool
    monotone_ok: bool
    complete_blocks: int
    insufficient_blocks: bool


def verify_hamming(
    w: HammingWitness, horizon: int, phi: Optional[PhiLike] = None
) -> HammingReport:
    """Evaluate the witness: full-series partial sums (divergence evidence),
    per-block sub-series sums over the set (bounded by a geometric series),
    and monotonicity of c/psi'.  Fewer than 3 complete blocks within the
    horizon only flags ``insufficient_blocks``."""
    psi = get_psi(w.psi_label)
    term = None
    if phi is not None:
        term, _ = _phi_fn(phi)
    c = w.coeffs()
    top = min(horizon, w.max_m)
    tb = TraceBuilder(f"full[{c.label}]", top, 0.5)
    acc = Neumaier()
    for a, b in chunk_ranges(1, top):
        ns = np.arange(a, b + 1, dtype=np.int64)
        vals = c.values(ns)
        tb.feed(ns, acc.total + np.cumsum(vals))
        acc.add(float(np.sum(vals)))
    full_trace = tb.build()

    complete = sum(1 for p in w.phi_at_nk[1:] if p <= horizon)
    block_full = []
    block_sub = []
    for k in range(complete):
        lo, hi = w.phi_at_nk[k] + 1, w.phi_at_nk[k + 1]
        dk = w.block_denominators[k]
        block_full.append(
            math.fsum(
                float(np.sum(np.asarray(psi.derivative(
                    np.arange(a, b + 1, dtype=float))) / dk))
                for a, b in chunk_ranges(lo, hi)
            )
        )
        if term is not None:
            block_sub.append(
                math.fsum(
                    float(psi.derivative(float(term(i)))) / dk
                    for i in range(w.nk[k] + 1, w.nk[k + 1] + 1)
                )
            )
        else:
            # weighted gap over the block's own elements telescopes exactly
            block_sub.append((w.apsi_at_nk[k + 1] - w.apsi_at_nk[k]) / dk)
    sub_total = math.fsum(block_sub)
    bound = (block_sub[0] if block_sub else 0.0) + 2.0
    dens = w.block_denominators[:complete]
    monotone = all(d2 >= d1 * (1 - 1e-12) for d1, d2 in zip(dens, dens[1:]))
    return HammingReport(
        full_trace=full_trace,
        block_full_sums=tuple(block_full),
        block_sub_sums=tuple(block_sub),
        subseries_total=sub_total,
        sub_bound=bound,
        sub_bound_ok=sub_total <= bound + 1e-9,
        monotone_ok=monotone,
        complete_blocks=complete,
        insufficient_blocks=complete < 3,
    )


# =====================================================================
# Binary-tree sparse set on which a divergent series diverges
# =====================================================================

@dataclass(frozen=True)
class AuerbachArtifacts:
    """Stage data of the progression-tree construction.

    ``branch_path[k]`` is the (first, stride) progression chosen at stage
    k+1 (stride 2^(k+1)); ``nk`` are the stage boundaries (exact ints,
    possibly far beyond float range); ``block_sums`` are the chosen-branch
    block sums over (n_k, n_{k+1}] (floats, with 30-digit decimal strings
    alongside).
    """

    c_label: str
    branch_path: tuple
    nk: tuple
    block_sums: tuple
    block_sums_str: tuple
    block_margins: tuple      # sum - stage index, scientific notation strings
    stage_exceeds: tuple

    def segments(self) -> list:
        out = []
        for k, (first, stride) in enumerate(self.branch_path):
            out.append((first, stride, self.nk[k] + 1, self.nk[k + 1]))
        return out

    def to_set(self) -> APSegmentSet:
        return APSegmentSet(self.segments(), label=f"auerbach[{self.c_label}]")


def _ap_first_member_above(first: int, stride: int, lo: int) -> int:
    """Smallest element of the progression strictly greater than lo."""
    if first > lo:
        return first
    return first + ((lo - first) // stride + 1) * stride


def _mp_dps_for(n: int) -> int:
    digits = max(1, (int(n).bit_length() * 30103) // 100000)
    return 40 + int(1.3 * digits)


def _mp_block_sum(c: CoeffSequence, first: int, stride: int, lo: int, hi: int):
    """sum of c over progression members in (lo, hi] at adaptive precision."""
    m0 = _ap_first_member_above(first, stride, lo)
    if m0 > hi:
        return mpmath.mpf(0)
    count = (hi - m0) // stride + 1
    with mpmath.workdps(_mp_dps_for(hi)):
        return +c.ap_sum(m0, stride, count)


def _mp_crossing(
    c: CoeffSequence,
    first: int,
    stride: int,
    lo: int,
    threshold: int,
    budget: "_Budget",
) -> Optional[int]:
    """Smallest member h of the progression with block sum over (lo, h]
    strictly above ``threshold``, via doubling plus binary search on the
    member count.  Returns None when the sum stalls below the threshold."""
    m0 = _ap_first_member_above(first, stride, lo)

    def sum_upto(count: int):
        budget.spend(1)
        with mpmath.workdps(_mp_dps_for(m0 + count * stride)):
            return +c.ap_sum(m0, stride, count)

    count = 1
    doublings = 0
    while sum_upto(count) <= threshold:
        count *= 2
        doublings += 1
        if doublings > 4000:  # crossing beyond ~10^1200 members: treat as stalled
            return None
    lo_c, hi_c = count // 2, count
    if hi_c == 1:
        return m0
    while lo_c + 1 < hi_c:
        mid = (lo_c + hi_c) // 2
        if sum_upto(mid) > threshold:
            hi_c = mid
        else:
            lo_c = mid
    return m0 + (hi_c - 1) * stride


class _Budget:
    def __init__(self, total: int, stage: int):
        self.left = int(total)
        self.stage = stage

    def spend(self, amount: int) -> None:
        self.left -= amount
        if self.left < 0:
            raise StageBudgetExhausted(self.stage)


def _slow_stage(c, br1, br2, n_prev, threshold, budget: "_Budget"):
    """Lockstep index scan of both branches; first admissible crossing wins,
    ties broken toward the first (odd-indexed) branch."""
    s1, s2 = Neumaier(), Neumaier()
    h = n_prev
    while True:
        a = h + 1
        b = a + min(budget.left, 1 << 16) - 1
        if b < a:
            raise StageBudgetExhausted(budget.stage)
        ns = np.arange(a, b + 1, dtype=np.int64)
        budget.spend(len(ns))
        vals = c.values(ns)
        w1 = np.where((ns - br1[0]) % br1[1] == 0, vals, 0.0)
        w1[ns < br1[0]] = 0.0
        w2 = np.where((ns - br2[0]) % br2[1] == 0, vals, 0.0)
        w2[ns < br2[0]] = 0.0
        cs1 = s1.total + np.cumsum(w1)
        cs2 = s2.total + np.cumsum(w2)
        hit = ((cs1 > threshold) | (cs2 > threshold)) & (ns > 2 * n_prev)
        if hit.any():
            i = int(np.argmax(hit))
            pick_first = bool(cs1[i] > threshold)
            return int(ns[i]), pick_first, float(cs1[i]), float(cs2[i])
        s1.add(float(np.sum(w1)))
        s2.add(float(np.sum(w2)))
        h = b


def auerbach_build(
    c: CoeffSequence,
    psi: Optional[PsiFunction] = None,
    k_max: int = 6,
    stage_budget: int = 10_000_000,
    probe_threshold: float = 1.0,
) -> AuerbachArtifacts:
    """Grow the progression tree stage by stage.

    At stage k the two successor progressions of the current node (the odd-
    and even-indexed halves, strides doubling) are scanned in lockstep over
    (n_{k-1}, h]; the first branch whose block sum strictly exceeds k at an
    admissible h (h > 2 n_{k-1}) is selected and n_k = h.  When the
    coefficient sequence provides closed-form progression sums, the
    crossing is located exactly by monotone search at adaptive precision,
    which is what makes stages with boundaries far beyond enumerable range
    feasible; otherwise a budgeted index scan is used.  ``psi`` is recorded
    only for report metadata; the set construction does not depend on it.

    Raises StageBudgetExhausted when a stage cannot certify its crossing,
    including stage 0 for a sequence whose divergence probe fails.
    """
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    from .series import divergence_probe

    naturals = ArithmeticProgression(1, 1, label="naturals")
    probe = divergence_probe(
        c, naturals, probe_threshold, min(stage_budget, 200_000)
    )
    if not probe.reached:
        raise StageBudgetExhausted(
            0, message=f"{c.label}: divergence probe stayed below {probe_threshold}"
        )

    node = (1, 1)
    nk = [0]
    branch_path = []
    sums = []
    sums_str = []
    margins = []
    exceeds = []
    for k in range(1, k_max + 1):
        first, stride = node
        br1 = (first, 2 * stride)
        br2 = (first + stride, 2 * stride)
        n_prev = nk[-1]
        budget = _Budget(stage_budget, k)
        if c.ap_sum is not None:
            h1 = _mp_crossing(c, br1[0], br1[1], n_prev, k, budget)
            h2 = _mp_crossing(c, br2[0], br2[1], n_prev, k, budget)
            if h1 is None and h2 is None:
                raise StageBudgetExhausted(k)
            h = min(x for x in (h1, h2) if x is not None)
            h = max(h, 2 * n_prev + 1)
            sa = _mp_block_sum(c, br1[0], br1[1], n_prev, h)
            sb = _mp_block_sum(c, br2[0], br2[1], n_prev, h)
            if sa > k:
                pick_first = True
                chosen_sum = sa
            elif sb > k:
                pick_first = False
                chosen_sum = sb
            else:
                raise StageBudgetExhausted(k)
            with mpmath.workdps(_mp_dps_for(h)):
                sums.append(float(chosen_sum))
                sums_str.append(mpmath.nstr(chosen_sum, 30))
                margins.append(mpmath.nstr(chosen_sum - k, 8))
                exceeds.append(bool(chosen_sum > k))
        else:
            h, pick_first, sa_f, sb_f = _slow_stage(c, br1, br2, n_prev, k, budget)
            chosen = sa_f if pick_first else sb_f
            sums.append(chosen)
            sums_str.append(repr(chosen))
            margins.append(repr(chosen - k))
            exceeds.append(chosen > k)
        node = br1 if pick_first else br2
        branch_path.append(node)
        nk.append(h)
    return AuerbachArtifacts(
        c_label=c.label,
        branch_path=tuple(branch_path),
        nk=tuple(nk),
        block_sums=tuple(sums),
        block_sums_str=tuple(sums_str),
        block_margins=tuple(margins),
        stage_exceeds=tuple(exceeds),
    )


@dataclass(frozen=True)
class AuerbachReport:
    stages: int
    growth_ok: bool                 # n_k > 2 n_{k-1} at every stage
    block_sums_ok: bool             # every block sum exceeds its stage index
    bound_ratios: tuple             # A_psi(n_r) / (n_r psi'(n_r)) per stage
    bound_limits: tuple             # (r - 1/2) / 2^(r-1) per stage
    bound_ok: bool
    checked_boundaries: tuple       # stage indices whose ratio was computable
    cond2_estimate: float           # finite-horizon liminf of psi/(x psi')
    density_ratios: tuple           # A_psi(n_r)/psi(n_r) when cond2 holds


def auerbach_verify(
    art: AuerbachArtifacts,
    psi: PsiFunction,
    horizon: int = 2_000_000,
    slack: float = 1e-9,
) -> AuerbachReport:
    """Check the recorded construction against its growth and decay bounds.

    With the identity weight the counting ratios are exact rational
    arithmetic at every boundary regardless of magnitude.  For other
    weights, boundaries beyond ``horizon`` are skipped (their members are
    not enumerable) and reported as unchecked.
    """
    if len(art.nk) < 3:
        raise DomainError("need at least two completed stages")
    growth_ok = all(b > 2 * a for a, b in zip(art.nk, art.nk[1:]))
    sums_ok = all(art.stage_exceeds)
    sset = art.to_set()
    identity = psi.label == "identity"

    ratios = []
    limits = []
    checked = []
    density = []
    ok = True
    for r in range(1, len(art.nk)):
        n_r = art.nk[r]
        limit = (2 * r - 1) / 2.0 ** r
        if identity:
            ratio = Fraction(sset.count(n_r), n_r)
            ok = ok and ratio <= Fraction(2 * r - 1, 2 ** r) + Fraction(1, 10 ** 9)
            ratios.append(float(ratio))
            limits.append(limit)
            checked.append(r)
            density.append(float(ratio))
            continue
        if n_r > horizon:
            continue
        acc = Neumaier()
        for a, b in chunk_ranges(1, n_r):
            ind = sset.indicator(a, b)
            if ind.any():
                xs = np.arange(a, b + 1, dtype=float)
                acc.add(float(np.sum(np.asarray(psi.derivative(xs))[ind])))
        apsi = acc.total
        ratio = apsi / (n_r * float(psi.derivative(float(n_r))))
        ok = ok and ratio <= limit + slack
        ratios.append(ratio)
        limits.append(limit)
        checked.append(r)
        density.append(apsi / float(psi.value(float(n_r))))

    from .psi import growth_report

    g = growth_report(psi, max(1000, min(horizon, 100_000)))
    cond2 = g.regularity_liminf
    return AuerbachReport(
        stages=len(art.nk) - 1,
        growth_ok=growth_ok,
        block_sums_ok=sums_ok,
        bound_ratios=tuple(ratios),
        bound_limits=tuple(limits),
        bound_ok=ok,
        checked_boundaries=tuple(checked),
        cond2_estimate=cond2,
        density_ratios=tuple(density) if cond2 > 0.01 else (),
    )


# =====================================================================
# Plateau-coefficient example with blocks [n^n, a n^n]
# =====================================================================

@dataclass(frozen=True)
class SalatExample:
    """Coefficients constant on plateaus [n^n, (n+1)^(n+1) - 1] with value
    n^-(n+2), and the set A = N ∩ U_n [n^n, a n^n] with a = 1/(1-delta).
    Endpoints are exact integers; counting never enumerates elements."""

    delta: Fraction
    a: Fraction
    block_cap: int = 60
    sharpness_psi: Optional[str] = None

    def block_interval(self, n: int) -> tuple:
        lo = n ** n
        hi = (self.a.numerator * lo) // self.a.denominator
        return lo, hi

    def plateau_interval(self, n: int) -> tuple:
        return n ** n, (n + 1) ** (n + 1) - 1

    def coeff_exact(self, n: int) -> Fraction:
        return Fraction(1, n ** (n + 2))

    def set_A(self, n_blocks: int) -> IntervalUnion:
        blocks = [self.block_interval(n) for n in range(1, n_blocks + 1)]
        return IntervalUnion.from_blocks(
            blocks, label=f"salat-blocks:delta={self.delta}"
        )

    def coeffs(self, n_blocks: int) -> CoeffSequence:
        """Plateau-constant coefficients up to the end of plateau n_blocks.
        Values for plateau indices beyond ~140 underflow float64 and are
        returned as 0.0; the exact generator stays exact throughout."""
        starts = [n ** n for n in range(1, n_blocks + 2)]
        top = (n_blocks + 1) ** (n_blocks + 1) - 1

        def plateau_of(m: int) -> int:
            return bisect_right(starts, m)

        def gen(m: int) -> float:
            n = plateau_of(m)
            return math.exp(-(n + 2) * math.log(n)) if n > 1 else 1.0

        # clip to int64 range: chunk indices are int64, so exact comparisons
        i64_starts = np.asarray(
            [min(s, (1 << 62)) for s in starts], dtype=np.int64
        )
        values = np.asarray(
            [1.0]
            + [math.exp(-(n + 2) * math.log(n)) for n in range(2, n_blocks + 2)]
        )

        def vec(ns: np.ndarray) -> np.ndarray:
            idx = np.searchsorted(i64_starts, ns, side="right")
            return values[idx - 1]

        return coeff_sequence(
            generator=gen,
            label=f"salat-coeffs:delta={self.delta}",
            hint="non_increasing",
            values_fn=vec,
            exact_generator=lambda m: self.coeff_exact(plateau_of(m)),
            max_n=top,
        )


def salat_example(
    delta: Union[float, str, Fraction], sharpness: bool = False
) -> SalatExample:
    """Build the example for a given delta in (0, 1); ``sharpness`` attaches
    the x/loglog(x+e^e) weight key for the weighted variant."""
    if isinstance(delta, str):
        d = Fraction(delta)
    elif isinstance(delta, Fraction):
        d = delta
    else:
        d = Fraction(delta).limit_denominator(10 ** 9)
    if not 0 < d < 1:
        raise DomainError("delta must lie in (0, 1)")
    return SalatExample(
        delta=d,
        a=1 / (1 - d),
        sharpness_psi="salat-sharpness" if sharpness else None,
    )


@dataclass(frozen=True)
class SalatReport:
    delta: float
    a: float
    n_blocks: int
    upper_checkpoints: tuple      # (n, ratio at floor(a n^n), meets delta)
    upper_ok: bool
    lower_checkpoints: tuple      # (n, ratio at (n+1)^(n+1)-1, asymptote+slack, ok)
    lower_ok: bool
    lower_decreasing: bool
    full_mass_cumulative: tuple   # cumulative full-series mass per block
    full_mass_lower_ok: bool      # each block mass > q/n for rational q > e-1
    sub_total: float
    sub_bound: float              # 3 + a pi^2/6
    sub_ok: bool
    not_right_checked: int
    not_right_ok: bool


def salat_example_verify(
    ex: SalatExample, n_blocks: int, not_right_max: int = 50
) -> SalatReport:
    """Exact-arithmetic verification of the example's counting claims.

    Upper checkpoints certify A(floor(a n^n)) / floor(a n^n) >= delta by
    integer comparison; lower checkpoints compare the counting ratio at the
    plateau ends against the closed asymptote 2a/(e(n+1)) plus slack 0.01
    (from the second checkpoint on).  Block masses of the full series are
    certified above q/n for a rational q > e - 1, and the superexponential
    gap inequality (n+1)^(n+1) - n^n > (e-1) n^(n+1) is certified exactly
    for all n <= ``not_right_max`` via rational bounds on e.
    """
    if n_blocks < 3:
        raise DomainError("need n_blocks >= 3")
    if n_blocks > ex.block_cap:
        raise BlockCapExceeded(f"n_blocks > {ex.block_cap}")
    A = ex.set_A(n_blocks)
    a = ex.a

    uppers = []
    upper_ok = True
    start = max(2, int(math.ceil(float(a) - 1.0)))
    for n in range(1, n_blocks + 1):
        m = ex.block_interval(n)[1]
        ratio = Fraction(A.count(m), m)
        ok = ratio >= ex.delta
        if n >= start:
            upper_ok = upper_ok and ok
        uppers.append((n, float(ratio), bool(ok)))

    lowers = []
    lower_ok = True
    prev = None
    decreasing = True
    for n in range(1, n_blocks + 1):
        m = (n + 1) ** (n + 1) - 1
        ratio = Fraction(A.count(m), m)
        asym = 2.0 * float(a) / (math.e * (n + 1)) + 0.01
        ok = float(ratio) <= asym
        if n >= 3:
            lower_ok = lower_ok and ok
            if prev is not None and ratio >= prev:
                decreasing = False
        if n >= 2:
            prev = ratio
        lowers.append((n, float(ratio), asym, bool(ok)))

    e_lo, e_hi = e_minus_one_bounds()
    mass_ok = True
    cum = Fraction(0)
    cum_masses = []
    for n in range(1, n_blocks + 1):
        mass = Fraction((n + 1) ** (n + 1) - n ** n, n ** (n + 2))
        # strict margin: block mass exceeds even an upper rational bound on e-1
        mass_ok = mass_ok and mass > e_hi / n
        cum += mass
        cum_masses.append(float(cum))

    sub_total = Fraction(0)
    for n in range(1, n_blocks + 1):
        plo, phi_ = ex.plateau_interval(n)
        members = A.count(phi_) - A.count(plo - 1)
        sub_total += members * ex.coeff_exact(n)
    sub_bound = 3.0 + float(a) * pi_sq_over_6()
    sub_ok = float(sub_total) <= sub_bound + 1e-9

    nr_ok = True
    for n in range(1, not_right_max + 1):
        lhs = (n + 1) ** (n + 1) - n ** n
        # lhs > (e-1) n^(n+1) certified via the rational upper bound on e-1
        if lhs * e_hi.denominator <= e_hi.numerator * n ** (n + 1):
            nr_ok = False
    return SalatReport(
        delta=float(ex.delta),
        a=float(a),
        n_blocks=n_blocks,
        upper_checkpoints=tuple(uppers),
        upper_ok=upper_ok,
        lower_checkpoints=tuple(lowers),
        lower_ok=lower_ok,
        lower_decreasing=decreasing,
        full_mass_cumulative=tuple(cum_masses),
        full_mass_lower_ok=mass_ok,
        sub_total=float(sub_total),
        sub_bound=sub_bound,
        sub_ok=sub_ok,
        not_right_checked=not_right_max,
        not_right_ok=nr_ok,
    )


@dataclass(frozen=True)
class SharpnessReport:
    alpha: float
    x0: float
    log_x0: float
    psi_concave: bool
    qualifying_blocks: tuple
    block_weight_lower: tuple   # (n, bracketed lhs, closed-form rhs, ok)
    block_weights_ok: bool
    density_checkpoints: tuple  # (n, lower ratio, target, ok)
    density_ok: bool
    sub_total: float
    sub_ok: bool


def sharpness_verify(
    ex: SalatExample, n_blocks: int, alpha: float = 2.0, slack: float = 0.02
) -> SharpnessReport:
    """Weighted variant: with psi(x) = x/loglog(x+e^e) the same set keeps
    upper weighted density >= delta/alpha while the weighted full series
    still diverges.  Block weights are bracketed with the concave-weight
    sandwich (never enumerated), and checkpoints certify the lower bound
    on the weighted counting ratio with additive ``slack``."""
    if ex.sharpness_psi is None:
        raise DomainError("example was built without the sharpness weight")
    if alpha <= 1:
        raise DomainError("alpha must exceed 1")
    if n_blocks < 3:
        raise DomainError("need n_blocks >= 3")
    if n_blocks > min(ex.block_cap, 100):
        raise BlockCapExceeded("plateau endpoints beyond float range")
    psi = get_psi(ex.sharpness_psi)
    log_x0 = math.exp(alpha / (alpha - 1.0)) - math.exp(math.e)
    x0 = math.exp(log_x0) if log_x0 < 700 else math.inf
    if math.isinf(x0) and n_blocks * math.log(n_blocks) < log_x0:
        raise DomainError(
            f"x0 is not float-representable (log x0 = {log_x0:.3g}) and no "
            "requested block qualifies"
        )
    concave = classify(psi, 10_000).in_D1

    def bracket_lower(lo: int, hi: int) -> float:
        # sum of psi' over [lo, hi] from below, by the concavity sandwich
        return (
            float(psi.value(float(hi)))
            - float(psi.value(float(lo)))
            + float(psi.derivative(float(hi)))
        )

    em1 = math.e - 1.0
    qual = []
    weights = []
    weights_ok = True
    for n in range(1, n_blocks + 1):
        if n * math.log(n) <= log_x0:
            continue
        qual.append(n)
        plo, phi_ = ex.plateau_interval(n)
        lhs = bracket_lower(plo, phi_) * math.exp(-(n + 2) * math.log(n)) \
            if n > 1 else bracket_lower(plo, phi_)
        rhs = em1 / (alpha * n * math.log(math.log(phi_ + 1 + EE)))
        ok = lhs >= rhs * (1.0 - 1e-9)
        weights_ok = weights_ok and ok
        weights.append((n, lhs, rhs, bool(ok)))

    A = ex.set_A(n_blocks)
    target = float(ex.delta) / alpha - slack
    dens = []
    dens_ok = True
    for n in range(3, n_blocks + 1):
        if n * math.log(n) <= log_x0:
            continue
        m = ex.block_interval(n)[1]
        acc = Neumaier()
        for lo, hi in A.intervals:
            if lo > m:
                break
            acc.add(bracket_lower(lo, min(hi, m)))
        ratio = acc.total / float(psi.value(float(m)))
        ok = ratio >= target
        dens_ok = dens_ok and ok
        dens.append((n, ratio, target, bool(ok)))

    base = salat_example_verify(ex, n_blocks)
    return SharpnessReport(
        alpha=alpha,
        x0=x0,
        log_x0=log_x0,
        psi_concave=concave,
        qualifying_blocks=tuple(qual),
        block_weight_lower=tuple(weights),
        block_weights_ok=weights_ok,
        density_checkpoints=tuple(dens),
        density_ok=dens_ok,
        sub_total=base.sub_total,
        sub_ok=base.sub_ok,
    )
