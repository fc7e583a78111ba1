"""Weight functions for weighted (psi-) densities.

A weight function here is a strictly increasing, differentiable, unbounded
map psi: (0, inf) -> (0, inf).  Densities of integer sets are formed from
partial sums of psi'(k), so everything in this module is evaluated on the
integer grid.  Three classes matter downstream:

* concave weights (psi' non-increasing on the grid),
* convex weights whose consecutive values satisfy psi(n+1)/psi(n) -> 1,
* log-concave weights (psi'/psi non-increasing).

The catalog stores log-type entries in shifted form (log(x+1),
(log(x+e))^alpha, x/loglog(x+e^e)) so that the domain starts at 1; shifts do
not change any asymptotic density.  Exponential-type entries carry analytic
``log_value``/``log_derivative`` so classification and growth reports stay
finite where the plain values overflow float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ClassError, DomainError
from .summation import CHUNK, LogSumExp, Neumaier, chunk_ranges, chunked_sum

EE = math.exp(math.e)  # e^e, shift used by the x/loglog(x+e^e) entry

# Relative slack for grid monotonicity checks.
MONO_SLACK = 1e-12


# =====================================================================
# Core type
# =====================================================================

@dataclass(frozen=True)
class PsiFunction:
    """A weight function together with its derivative on [domain_start, inf).

    ``value`` and ``derivative`` are vectorized (accept numpy arrays).
    ``log_value``/``log_derivative`` are analytic logs for entries whose
    plain values overflow float64 within working horizons.  ``exact_prime``
    returns psi'(n) as a Fraction when that is exact (identity, integer
    powers, shifted log).  ``float_horizon`` is the largest x at which value
    and derivative are float64-representable; ``check_ceiling`` caps the
    finite-difference validation grid so truncation error stays below the
    validation tolerance.
    """

    label: str
    value: Callable
    derivative: Callable
    domain_start: float = 1.0
    log_value: Optional[Callable] = None
    log_derivative: Optional[Callable] = None
    exact_prime: Optional[Callable[[int], Fraction]] = None
    float_horizon: float = math.inf
    check_ceiling: float = 1.0e6
    definition: str = ""

    def grid_start(self) -> int:
        return max(1, int(math.ceil(self.domain_start)))

    def logv(self, xs):
        """log psi(x), analytic when provided."""
        if self.log_value is not None:
            return self.log_value(xs)
        return np.log(self.value(xs))

    def logd(self, xs):
        """log psi'(x), analytic when provided."""
        if self.log_derivative is not None:
            return self.log_derivative(xs)
        return np.log(self.derivative(xs))


@dataclass(frozen=True)
class PsiClassReport:
    """Grid evidence for class membership of a weight function."""

    label: str
    grid_horizon: int
    in_D1: bool                 # psi' non-increasing on the grid
    in_D2: bool                 # psi' non-decreasing and psi(n+1)/psi(n) ~ 1
    log_concave: bool           # psi'/psi non-increasing on the grid
    ratio_tail_max: float       # max psi(n+1)/psi(n) over the final decade
    asym_ratio_trace: tuple     # ((n, sum(psi'(1..n))/psi(n)), ...)

    @property
    def asym_final(self) -> float:
        return self.asym_ratio_trace[-1][1]


@dataclass(frozen=True)
class GrowthReport:
    """Finite-horizon growth estimates over the window [start, horizon]."""

    label: str
    horizon: int
    window_start: int
    order_lower: float
    order_upper: float
    doubling_C: float           # inf when only representable in logs
    log_doubling_C: float
    regularity_liminf: float    # min psi(x) / (x psi'(x))
    increment_limsup: float     # max x log(psi(x+1)/psi(x))
    increment_trend: str        # "bounded" | "growing"
    log_domain: bool


@dataclass(frozen=True)
class PsiValidation:
    """Finite sampling evidence for the basic weight-function contract."""

    label: str
    strictly_increasing: bool
    positive: bool
    growth_factor: float        # psi(top)/psi(bottom) on the sample grid
    unbounded_evidence: bool    # growth_factor comfortably above 1
    derivative_max_rel_err: float
    derivative_consistent: bool


# =====================================================================
# Catalog
# =====================================================================

def _identity() -> PsiFunction:
    return PsiFunction(
        label="identity",
        value=lambda x: np.asarray(x, dtype=float) + 0.0,
        derivative=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        exact_prime=lambda n: Fraction(1),
        definition="x",
    )


def _power(p: float) -> PsiFunction:
    if p <= 0:
        raise DomainError("power exponent must be positive")
    exact = None
    if float(p).is_integer() and p >= 1:
        ip = int(p)
        exact = lambda n: Fraction(ip) * Fraction(n) ** (ip - 1)
    return PsiFunction(
        label=f"power:p={_fmt(p)}",
        value=lambda x, p=p: np.asarray(x, dtype=float) ** p,
        derivative=lambda x, p=p: p * np.asarray(x, dtype=float) ** (p - 1.0),
        exact_prime=exact,
        float_horizon=10.0 ** (306.0 / max(p, 1.0)),
        definition=f"x^{_fmt(p)}",
    )


def _log_shifted() -> PsiFunction:
    return PsiFunction(
        label="log",
        value=lambda x: np.log1p(np.asarray(x, dtype=float)),
        derivative=lambda x: 1.0 / (np.asarray(x, dtype=float) + 1.0),
        exact_prime=lambda n: Fraction(1, n + 1),
        definition="log(x+1)",
    )


def _logpow(alpha: float) -> PsiFunction:
    if alpha <= 0:
        raise DomainError("logpow exponent must be positive")

    def val(x, a=alpha):
        return np.log(np.asarray(x, dtype=float) + math.e) ** a

    def der(x, a=alpha):
        xf = np.asarray(x, dtype=float)
        return a * np.log(xf + math.e) ** (a - 1.0) / (xf + math.e)

    return PsiFunction(
        label=f"logpow:alpha={_fmt(alpha)}",
        value=val,
        derivative=der,
        definition=f"(log(x+e))^{_fmt(alpha)}",
    )


def _explog(delta: float) -> PsiFunction:
    if not 0 < delta <= 1:
        raise DomainError("explog exponent must lie in (0, 1]")

    def val(x, d=delta):
        return np.exp(np.asarray(x, dtype=float) ** d)

    def der(x, d=delta):
        xf = np.asarray(x, dtype=float)
        return d * xf ** (d - 1.0) * np.exp(xf ** d)

    def lval(x, d=delta):
        return np.asarray(x, dtype=float) ** d

    def lder(x, d=delta):
        xf = np.asarray(x, dtype=float)
        return math.log(d) + (d - 1.0) * np.log(xf) + xf ** d

    return PsiFunction(
        label=f"explog:delta={_fmt(delta)}",
        value=val,
        derivative=der,
        log_value=lval,
        log_derivative=lder,
        float_horizon=700.0 ** (1.0 / delta),
        check_ceiling=min((16.0 / delta) ** (1.0 / delta), 1.0e6),
        definition=f"exp(x^{_fmt(delta)})",
    )


def _sharpness() -> PsiFunction:
    # x / loglog(x + e^e); the derivative below is the closed form of d/dx.
    def val(x):
        xf = np.asarray(x, dtype=float)
        return xf / np.log(np.log(xf + EE))

    def der(x):
        xf = np.asarray(x, dtype=float)
        ll = np.log(np.log(xf + EE))
        corr = xf / ((xf + EE) * np.log(xf + EE))
        return (ll - corr) / ll ** 2

    return PsiFunction(
        label="salat-sharpness",
        value=val,
        derivative=der,
        definition="x/loglog(x+e^e)",
    )


def _expalpha(alpha: float) -> PsiFunction:
    if alpha <= 0:
        raise DomainError("exponential rate must be positive")
    return PsiFunction(
        label=f"expalpha:alpha={_fmt(alpha)}",
        value=lambda x, a=alpha: np.exp(a * np.asarray(x, dtype=float)),
        derivative=lambda x, a=alpha: a * np.exp(a * np.asarray(x, dtype=float)),
        log_value=lambda x, a=alpha: a * np.asarray(x, dtype=float),
        log_derivative=lambda x, a=alpha: math.log(a)
        + a * np.asarray(x, dtype=float),
        float_horizon=700.0 / alpha,
        check_ceiling=24.0 / alpha,
        definition=f"exp({_fmt(alpha)}*x)",
    )


def _fmt(x: float) -> str:
    xf = float(x)
    return str(int(xf)) if xf.is_integer() else repr(xf)


_FIXED = {
    "identity": _identity,
    "log": _log_shifted,
    "salat-sharpness": _sharpness,
    "sqrt": lambda: _power(0.5),
    "exp": lambda: _expalpha(1.0),
}

_PARAMETRIC = {
    "power": ("p", _power),
    "logpow": ("alpha", _logpow),
    "explog": ("delta", _explog),
    "expalpha": ("alpha", _expalpha),
}


@lru_cache(maxsize=None)
def get_psi(key: str) -> PsiFunction:
    """Resolve a catalog key such as ``identity`` or ``power:p=2``."""
    key = key.strip()
    if key in _FIXED:
        return _FIXED[key]()
    if ":" in key:
        name, _, rest = key.partition(":")
        if name in _PARAMETRIC:
            pname, builder = _PARAMETRIC[name]
            raw = rest
            if "=" in rest:
                got, _, raw = rest.partition("=")
                if got != pname:
                    raise DomainError(
                        f"psi key {key!r}: expected parameter {pname!r}, got {got!r}"
                    )
            try:
                return builder(float(raw))
            except ValueError as exc:
                raise DomainError(f"psi key {key!r}: bad parameter value") from exc
    raise DomainError(f"unknown psi key {key!r}")


def catalog_keys() -> dict:
    """Catalog entries (key -> definition string) for listings."""
    out = {}
    for name, builder in _FIXED.items():
        out[name] = builder().definition
    out["power:p=<p>"] = "x^p"
    out["logpow:alpha=<a>"] = "(log(x+e))^a"
    out["explog:delta=<d>"] = "exp(x^d)"
    out["expalpha:alpha=<a>"] = "exp(a*x)"
    return out


# Default concrete instances exercised by the test suite.
DEFAULT_CATALOG = (
    "identity",
    "power:p=2",
    "power:p=3",
    "sqrt",
    "log",
    "logpow:alpha=2",
    "explog:delta=0.5",
    "salat-sharpness",
    "exp",
)

# Entries that are concave on the integer grid (derivative non-increasing).
CONCAVE_CATALOG = ("identity", "sqrt", "log", "logpow:alpha=2", "salat-sharpness")


# =====================================================================
# Grid scans
# =====================================================================

def _require_grid(psi: PsiFunction, n: int) -> None:
    if n < 1:
        raise DomainError("grid index must be >= 1")
    if psi.grid_start() > 1:
        raise DomainError(
            f"{psi.label}: integers below domain_start={psi.domain_start} requested"
        )


@lru_cache(maxsize=256)
def _grid_monotonicity(psi: PsiFunction, horizon: int):
    """Scan the integer grid once; returns (d_noninc, d_nondec, logcc_noninc,
    ratio_tail_max).  Comparisons use relative slack MONO_SLACK, evaluated in
    the log domain so exponential-type entries stay finite."""
    start = psi.grid_start()
    d_noninc = True
    d_nondec = True
    cc_noninc = True
    ratio_max = 0.0
    dec_lo = max(start, horizon // 10)
    prev_ld = None
    prev_cc = None
    prev_lv = None
    for a, b in chunk_ranges(start, horizon, CHUNK):
        xs = np.arange(a, b + 1, dtype=float)
        lv = psi.logv(xs)
        ld = psi.logd(xs)
        cc = ld - lv
        if prev_ld is not None:
            ld_full = np.concatenate(([prev_ld], ld))
            cc_full = np.concatenate(([prev_cc], cc))
            lv_full = np.concatenate(([prev_lv], lv))
        else:
            ld_full, cc_full, lv_full = ld, cc, lv
        ddiff = np.diff(ld_full)
        if np.any(ddiff > MONO_SLACK):
            d_noninc = False
        if np.any(ddiff < -MONO_SLACK):
            d_nondec = False
        if np.any(np.diff(cc_full) > MONO_SLACK):
            cc_noninc = False
        # consecutive value ratios inside the final decade of the grid
        first_n = a - (1 if prev_ld is not None else 0)
        if b >= dec_lo and horizon > start:
            vdiff = np.diff(lv_full)
            ns_left = np.arange(first_n, b, dtype=np.int64)
            mask = ns_left >= dec_lo
            if np.any(mask):
                ratio_max = max(ratio_max, float(np.exp(np.max(vdiff[mask]))))
        prev_ld = ld[-1]
        prev_cc = cc[-1]
        prev_lv = lv[-1]
    return d_noninc, d_nondec, cc_noninc, ratio_max


def _checkpoints(horizon: int, start: int = 1, ratio: float = 2.0):
    """Logarithmically spaced checkpoints in [start, horizon], horizon last."""
    pts = []
    x = float(max(1, start))
    while x < horizon:
        n = int(round(x))
        if n >= start and (not pts or n > pts[-1]):
            pts.append(n)
        x *= ratio
    if not pts or pts[-1] != horizon:
        pts.append(horizon)
    return pts


def classify(psi: PsiFunction, grid_horizon: int = 100_000) -> PsiClassReport:
    """Classify a weight function from integer-grid evidence.

    Monotonicity of psi' and psi'/psi is tested on integers up to
    ``grid_horizon`` with relative slack 1e-12; the consecutive-value ratio
    condition is tested over the final decade of the grid against 1 + 1e-3.
    The asymptotic ratio sum(psi'(1..n))/psi(n) is traced at logarithmic
    checkpoints (via a running log-sum-exp for exponential-type entries).
    """
    if grid_horizon < 16:
        raise DomainError("grid_horizon must be >= 16")
    _require_grid(psi, 1)
    d_noninc, d_nondec, cc_noninc, ratio_max = _grid_monotonicity(psi, grid_horizon)
    in_d1 = d_noninc
    in_d2 = d_nondec and ratio_max <= 1.0 + 1e-3

    start = psi.grid_start()
    cps = _checkpoints(grid_horizon, start)
    trace = []
    use_log = psi.log_value is not None
    acc_lin = Neumaier()
    acc_log = LogSumExp()
    pos = start
    for n in cps:
        if n >= pos:
            for a, b in chunk_ranges(pos, n, CHUNK):
                xs = np.arange(a, b + 1, dtype=float)
                if use_log:
                    acc_log.add_array(psi.logd(xs))
                else:
                    acc_lin.add(float(np.sum(psi.derivative(xs))))
            pos = n + 1
        if use_log:
            ratio = math.exp(acc_log.log_total - float(psi.logv(float(n))))
        else:
            ratio = acc_lin.total / float(psi.value(float(n)))
        trace.append((n, ratio))
    return PsiClassReport(
        label=psi.label,
        grid_horizon=grid_horizon,
        in_D1=in_d1,
        in_D2=in_d2,
        log_concave=cc_noninc,
        ratio_tail_max=ratio_max,
        asym_ratio_trace=tuple(trace),
    )


def is_concave_on(psi: PsiFunction, upto: int) -> bool:
    """psi' non-increasing on integers up to ``upto`` (cached grid scan)."""
    upto = max(16, int(upto))
    return _grid_monotonicity(psi, upto)[0]


def is_log_concave_on(psi: PsiFunction, upto: int) -> bool:
    upto = max(16, int(upto))
    return _grid_monotonicity(psi, upto)[2]


# =====================================================================
# Operations
# =====================================================================

def psi_prime_sum(psi: PsiFunction, n: int) -> float:
    """Compensated sum of psi'(k) for k = 1..n."""
    _require_grid(psi, n)
    return chunked_sum(psi.derivative, 1, n)


def growth_report(
    psi: PsiFunction, horizon: int, tail_fraction: float = 0.5
) -> GrowthReport:
    """Finite-horizon growth statistics over [tail_fraction*horizon, horizon].

    All quantities are computed from log values so exponential-type entries
    produce finite reports; the doubling constant falls back to its log when
    exp would overflow (``log_domain`` is then set).
    """
    if horizon < 1000:
        raise DomainError("growth horizon must be >= 1e3")
    _require_grid(psi, 1)
    w0 = max(psi.grid_start(), int(math.ceil(horizon * tail_fraction)))
    use_log = psi.log_value is not None or 2.0 * horizon > psi.float_horizon
    order_lo = math.inf
    order_hi = -math.inf
    log_dbl = -math.inf
    dbl_max = 0.0
    reg_min = math.inf
    inc_max = -math.inf
    inc_first = None
    inc_last = None
    for a, b in chunk_ranges(w0, horizon, CHUNK):
        xs = np.arange(a, b + 1, dtype=float)
        lx = np.log(xs)
        if use_log:
            lv = psi.logv(xs)
            order = lv / lx
            log_dbl = max(log_dbl, float(np.max(psi.logv(2.0 * xs) - lv)))
            reg = np.exp(lv - psi.logd(xs) - lx)
            inc = xs * (psi.logv(xs + 1.0) - lv)
        else:
            v = np.asarray(psi.value(xs), dtype=float)
            order = np.log(v) / lx
            dbl_max = max(dbl_max, float(np.max(psi.value(2.0 * xs) / v)))
            reg = v / (xs * np.asarray(psi.derivative(xs), dtype=float))
            inc = xs * np.log(np.asarray(psi.value(xs + 1.0), dtype=float) / v)
        order_lo = min(order_lo, float(np.min(order)))
        order_hi = max(order_hi, float(np.max(order)))
        reg_min = min(reg_min, float(np.min(reg)))
        inc_max = max(inc_max, float(np.max(inc)))
        if inc_first is None:
            inc_first = float(inc[0])
        inc_last = float(inc[-1])
    if use_log:
        log_domain = log_dbl > math.log(1e300)
        doubling = math.inf if log_domain else math.exp(log_dbl)
    else:
        log_domain = False
        doubling = dbl_max
        log_dbl = math.log(dbl_max)
    trend = "growing" if inc_last > 1.25 * inc_first + 1e-9 else "bounded"
    return GrowthReport(
        label=psi.label,
        horizon=horizon,
        window_start=w0,
        order_lower=order_lo,
        order_upper=order_hi,
        doubling_C=doubling,
        log_doubling_C=log_dbl,
        regularity_liminf=reg_min,
        increment_limsup=inc_max,
        increment_trend=trend,
        log_domain=log_domain,
    )


def sandwich_check(psi: PsiFunction, n: int, m: int) -> bool:
    """For concave weights, partial sums of psi' bracket increments of psi:

        sum_{j=n+1..m} psi'(j) <= psi(m) - psi(n)
                               <= sum_{j=n+1..m} psi'(j) + psi'(n) - psi'(m)

    Checked with additive slack 1e-12 * psi(m) for rounding.
    """
    if not 1 <= n < m:
        raise DomainError("need 1 <= n < m")
    _require_grid(psi, m)
    if not is_concave_on(psi, m):
        raise ClassError(f"{psi.label}: sandwich check requires a concave weight")
    s = chunked_sum(psi.derivative, n + 1, m)
    vm = float(psi.value(float(m)))
    vn = float(psi.value(float(n)))
    dn = float(psi.derivative(float(n)))
    dm = float(psi.derivative(float(m)))
    slack = 1e-12 * vm
    return (s <= vm - vn + slack) and (vm - vn <= s + dn - dm + slack)


def sandwich_violations(psi: PsiFunction, n_max: int) -> int:
    """Count sandwich violations over all pairs 1 <= n < m <= n_max.

    Vectorized batch form of :func:`sandwich_check` (same slack); the
    prefix sums are accumulated with compensation before broadcasting.
    """
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    _require_grid(psi, n_max)
    if not is_concave_on(psi, n_max):
        raise ClassError(f"{psi.label}: sandwich check requires a concave weight")
    xs = np.arange(1, n_max + 1, dtype=float)
    d = np.asarray(psi.derivative(xs), dtype=float)
    v = np.asarray(psi.value(xs), dtype=float)
    prefix = np.empty(n_max + 1)
    prefix[0] = 0.0
    acc = Neumaier()
    for i in range(n_max):
        acc.add(float(d[i]))
        prefix[i + 1] = acc.total
    # S[n, m] = sum_{j=n+1..m} psi'(j); rows n = 1.., cols m = 1..
    S = prefix[None, 1:] - prefix[1:, None]
    dv = v[None, :] - v[:, None]
    dd = d[:, None] - d[None, :]
    slack = 1e-12 * v[None, :]
    upper = np.triu(np.ones((n_max, n_max), dtype=bool), k=1)
    bad_lo = (S > dv + slack) & upper
    bad_hi = (dv > S + dd + slack) & upper
    return int(np.count_nonzero(bad_lo | bad_hi))


def logconcave_gap(psi: PsiFunction, horizon: int) -> float:
    """min over integer x in [2, horizon] of (psi(x) - psi(x-1)) / psi'(x).

    Strictly positive for log-concave weights; computed in the log domain
    for exponential-type entries.
    """
    if horizon < 10:
        raise DomainError("horizon must be >= 10")
    _require_grid(psi, horizon)
    if not is_log_concave_on(psi, horizon):
        raise ClassError(f"{psi.label}: gap requires a log-concave weight")
    lo = max(2, psi.grid_start() + 1)
    gap = math.inf
    use_log = psi.log_value is not None
    for a, b in chunk_ranges(lo, horizon, CHUNK):
        xs = np.arange(a, b + 1, dtype=float)
        if use_log:
            lv = psi.logv(xs)
            lvm1 = psi.logv(xs - 1.0)
            g = -np.expm1(lvm1 - lv) * np.exp(lv - psi.logd(xs))
        else:
            g = (psi.value(xs) - psi.value(xs - 1.0)) / psi.derivative(xs)
        gap = min(gap, float(np.min(g)))
    return gap


def validate(psi: PsiFunction, horizon: float | None = None) -> PsiValidation:
    """Sampled evidence for the basic contract: strictly increasing,
    positive, unbounded, and derivative consistent with central finite
    differences (h = 1e-4 x, tolerance 1e-6 relative to max(1, psi'))."""
    top = min(
        horizon if horizon is not None else psi.check_ceiling,
        psi.check_ceiling,
        psi.float_horizon * 0.5,
    )
    lo = psi.domain_start
    xs = np.unique(np.geomspace(max(lo, 1.0), max(top, lo + 10.0), 256))
    v = np.asarray(psi.value(xs), dtype=float)
    increasing = bool(np.all(np.diff(v) > 0))
    positive = bool(np.all(v > 0))
    growth = float(v[-1] / v[0])

    samples = np.unique(np.geomspace(max(lo + 1.0, 2.0), max(top, lo + 10.0), 100))
    h = 1e-4 * samples
    fd = (np.asarray(psi.value(samples + h)) - np.asarray(psi.value(samples - h))) / (
        2.0 * h
    )
    d = np.asarray(psi.derivative(samples), dtype=float)
    rel = np.abs(fd - d) / np.maximum(1.0, d)
    max_rel = float(np.max(rel))
    return PsiValidation(
        label=psi.label,
        strictly_increasing=increasing,
        positive=positive,
        growth_factor=growth,
        unbounded_evidence=growth >= 8.0,
        derivative_max_rel_err=max_rel,
        derivative_consistent=max_rel <= 1e-6,
    )
