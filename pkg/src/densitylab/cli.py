"""Command-line front end.

One recipe per invocation; reports are canonical JSON (or CSV for traces)
with the resolved configuration embedded.  Exit codes: 0 for a completed
run with all hard checks passing, 2 when a soft mathematical check was
violated (an anomaly), 1 for usage or runtime errors.  ``--plot`` renders
a PNG figure next to the data file for recipes that produce series.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .constants import log2_fraction
from .errors import DensityLabError
from .intsets import linear_density_report, parse_set, psi_density_report
from .intsets import chain_check as run_chain_check
from .psi import (
    catalog_keys,
    classify,
    get_psi,
    growth_report,
    sandwich_violations,
    validate,
)
from .report import SCHEMA_VERSION, render_json, trace_csv_bytes, write_bytes
from .series import (
    abel_identity_check,
    coeff_sequence,
    coeff_catalog,
    condition_trace,
    divergence_probe,
    necessity_trace,
    olivier_trace,
    parse_coeff,
    ratio_trace,
    subseries_partial_sums,
)
from .signed import (
    abel_signed_identity_check,
    parse_sign,
    rajagopal_means,
    sign_catalog,
    signed_decay_traces,
    subsigned_partial_sums,
    toeplitz_row_sums_batch,
    toeplitz_rows,
)
from .summation import CHUNK
from .constructions import (
    auerbach_build,
    auerbach_verify,
    check_nk,
    hamming_coeffs,
    salat_example,
    salat_example_verify,
    select_nk,
    sharpness_verify,
    verify_hamming,
)

RECIPES = (
    "density", "chain", "hamming", "auerbach", "salat-example", "sharpness",
    "gasull", "toeplitz", "rajagopal", "olivier", "abel",
)


class Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this CLI reserves 2 for
    mathematical anomalies, so usage errors exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _add_common(p: Parser) -> None:
    p.add_argument("--out", help="write the report to this path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--plot", action="store_true",
                   help="render a PNG figure next to --out")
    p.add_argument("--config", help="key=value file; command-line flags win")
    p.add_argument("--tail-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)


def _int(text: str) -> int:
    return int(float(text))


def build_parser() -> Parser:
    top = Parser(prog="densitylab", description=__doc__)
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", help="list catalog keys, literals and recipes")
    p.set_defaults(func=cmd_list)
    _add_common(p)

    p = sub.add_parser("density", help="linear and weighted density estimates")
    p.add_argument("--set", dest="set_literal", required=True)
    p.add_argument("--psi")
    p.add_argument("--horizon", type=_int, default=1_000_000)
    p.add_argument("--normalization", choices=("sum", "psi_value"), default="sum")
    p.set_defaults(func=cmd_density)
    _add_common(p)

    p = sub.add_parser("chain", help="density chain-ordering check")
    p.add_argument("--set", dest="set_literal", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--horizon", type=_int, default=1_000_000)
    p.set_defaults(func=cmd_chain)
    _add_common(p)

    p = sub.add_parser("classify-psi", help="grid classification of a weight")
    p.add_argument("--psi", required=True)
    p.add_argument("--grid-horizon", type=_int, default=100_000)
    p.set_defaults(func=cmd_classify)
    _add_common(p)

    p = sub.add_parser("growth", help="finite-horizon growth report")
    p.add_argument("--psi", required=True)
    p.add_argument("--horizon", type=_int, default=100_000)
    p.set_defaults(func=cmd_growth)
    _add_common(p)

    p = sub.add_parser("trace", help="limit traces of series quantities")
    p.add_argument("--kind", required=True, choices=(
        "subseries", "ratio", "olivier", "necessity", "condition", "subsigned"))
    p.add_argument("--c", dest="coeff")
    p.add_argument("--set", dest="set_literal")
    p.add_argument("--psi")
    p.add_argument("--sign")
    p.add_argument("--which", choices=("concave", "convex"))
    p.add_argument("--mode", choices=("compensated", "exact_rational"),
                   default="compensated")
    p.add_argument("--horizon", type=_int, default=1_000_000)
    p.set_defaults(func=cmd_trace)
    _add_common(p)

    pc = sub.add_parser("construct", help="build a witness artifact")
    csub = pc.add_subparsers(dest="what", required=True)

    p = csub.add_parser("hamming")
    p.add_argument("--phi", required=True, help="set literal for the sparse set")
    p.add_argument("--psi", default="identity")
    p.add_argument("--kmax", type=_int, default=5)
    p.add_argument("--budget", type=_int, default=10_000_000)
    p.set_defaults(func=cmd_construct_hamming)
    _add_common(p)

    p = csub.add_parser("auerbach")
    p.add_argument("--c", dest="coeff", required=True)
    p.add_argument("--kmax", type=_int, default=6)
    p.add_argument("--stage-budget", type=_int, default=10_000_000)
    p.set_defaults(func=cmd_construct_auerbach)
    _add_common(p)

    p = csub.add_parser("salat")
    p.add_argument("--delta", required=True)
    p.add_argument("--sharpness", action="store_true")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--blocks", type=_int, default=8)
    p.set_defaults(func=cmd_construct_salat)
    _add_common(p)

    pv = sub.add_parser("verify", help="run a verification recipe")
    vsub = pv.add_subparsers(dest="what", required=True)

    p = vsub.add_parser("abel")
    p.add_argument("--n", type=_int, default=1000, help="max identity length")
    p.add_argument("--trials", type=_int, default=100)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_verify_abel)
    _add_common(p)

    p = vsub.add_parser("toeplitz")
    p.add_argument("--c", dest="coeff", default="recip")
    p.add_argument("--psi", default="identity")
    p.add_argument("--nmax", type=_int, default=10_000)
    p.set_defaults(func=cmd_verify_toeplitz)
    _add_common(p)

    p = vsub.add_parser("rajagopal")
    p.add_argument("--set", dest="set_literal", default="evens")
    p.add_argument("--a", dest="weights_a", default="recip")
    p.add_argument("--b", dest="weights_b", default="const:1")
    p.add_argument("--horizon", type=_int, default=100_000)
    p.set_defaults(func=cmd_verify_rajagopal)
    _add_common(p)

    p = vsub.add_parser("olivier")
    p.add_argument("--c", dest="coeff", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--horizon", type=_int, default=1_000_000)
    p.add_argument("--bound", type=float, help="anomaly if tail sup exceeds this")
    p.set_defaults(func=cmd_verify_olivier)
    _add_common(p)

    p = vsub.add_parser("sandwich")
    p.add_argument("--psi", default="identity")
    p.add_argument("--nmax", type=_int, default=1000)
    p.set_defaults(func=cmd_verify_sandwich)
    _add_common(p)

    p = vsub.add_parser("hamming")
    p.add_argument("--phi", default="squares")
    p.add_argument("--psi", default="identity")
    p.add_argument("--kmax", type=_int, default=5)
    p.add_argument("--budget", type=_int, default=10_000_000)
    p.set_defaults(func=cmd_verify_hamming)
    _add_common(p)

    p = vsub.add_parser("auerbach")
    p.add_argument("--c", dest="coeff", default="recip")
    p.add_argument("--psi", default="identity")
    p.add_argument("--kmax", type=_int, default=6)
    p.add_argument("--stage-budget", type=_int, default=10_000_000)
    p.add_argument("--horizon", type=_int, default=2_000_000)
    p.set_defaults(func=cmd_verify_auerbach)
    _add_common(p)

    p = vsub.add_parser("salat-example")
    p.add_argument("--delta", default="0.5")
    p.add_argument("--blocks", type=_int, default=8)
    p.set_defaults(func=cmd_verify_salat)
    _add_common(p)

    p = vsub.add_parser("sharpness")
    p.add_argument("--delta", default="0.5")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--blocks", type=_int, default=10)
    p.set_defaults(func=cmd_verify_sharpness)
    _add_common(p)

    p = vsub.add_parser("gasull")
    p.add_argument("--sign", default="alt")
    p.add_argument("--c", dest="coeff", default="recip")
    p.add_argument("--psi", default="identity")
    p.add_argument("--horizon", type=_int, default=1_000_000)
    p.set_defaults(func=cmd_verify_gasull)
    _add_common(p)

    p = sub.add_parser("selftest", help="fast internal consistency battery")
    p.set_defaults(func=cmd_selftest)
    _add_common(p)
    return top


# =====================================================================
# Runners: each returns (result, anomalies, series-for-csv/plot)
# =====================================================================

def cmd_list(args):
    lines = ["psi keys:"]
    for k, v in catalog_keys().items():
        lines.append(f"  {k:24s} {v}")
    lines.append("set literals:")
    for k in ("ap:<first>,<stride>", "evens", "odds", "naturals", "squares",
              "primes:<horizon>", "intervals:<file.json>", "phi:<file.csv>",
              "finite:<a,b,...>"):
        lines.append(f"  {k}")
    lines.append("sequence literals:")
    for k, v in coeff_catalog().items():
        lines.append(f"  {k:24s} {v}")
    lines.append("sign literals:")
    for k, v in sign_catalog().items():
        lines.append(f"  {k:24s} {v}")
    lines.append("recipes:")
    lines.append("  " + ", ".join(RECIPES))
    return {"listing": lines}, [], None


def cmd_density(args):
    A = parse_set(args.set_literal, args.horizon)
    lin = linear_density_report(A, args.horizon, args.tail_fraction)
    result = {"linear": lin}
    series = {"A(n)/n": lin.checkpoints}
    if args.psi:
        psi = get_psi(args.psi)
        wei = psi_density_report(
            A, psi, args.horizon, args.tail_fraction, args.normalization
        )
        result["weighted"] = wei
        series["weighted ratio"] = wei.checkpoints
    return result, [], {"series": series, "title": f"density of {A.label}",
                        "ylabel": "ratio"}


def cmd_chain(args):
    A = parse_set(args.set_literal, args.horizon)
    psi = get_psi(args.psi)
    rep = run_chain_check(A, psi, args.horizon, args.tail_fraction)
    anomalies = [] if rep.ordered else ["density chain ordering violated"]
    return rep, anomalies, None


def cmd_classify(args):
    rep = classify(get_psi(args.psi), args.grid_horizon)
    return rep, [], {"series": {"sum psi'/psi": rep.asym_ratio_trace},
                     "title": f"asymptotic ratio of {args.psi}",
                     "ylabel": "ratio"}


def cmd_growth(args):
    rep = growth_report(get_psi(args.psi), args.horizon, args.tail_fraction)
    return rep, [], None


def cmd_trace(args):
    kind = args.kind
    if kind == "subseries":
        c = parse_coeff(args.coeff)
        A = parse_set(args.set_literal, args.horizon)
        tr = subseries_partial_sums(c, A, args.horizon, args.mode,
                                    args.tail_fraction)
    elif kind == "ratio":
        c = parse_coeff(args.coeff)
        A = parse_set(args.set_literal, args.horizon)
        tr = ratio_trace(c, A, args.horizon, args.tail_fraction)
    elif kind == "olivier":
        tr = olivier_trace(parse_coeff(args.coeff), get_psi(args.psi),
                           args.horizon, args.tail_fraction)
    elif kind == "necessity":
        c = parse_coeff(args.coeff).with_hint("c_over_psi_prime_non_increasing")
        A = parse_set(args.set_literal, args.horizon)
        tr = necessity_trace(c, A, get_psi(args.psi), args.horizon,
                             args.tail_fraction)
    elif kind == "condition":
        if not args.which:
            raise DensityLabError("--which is required for condition traces")
        tr = condition_trace(parse_coeff(args.coeff), get_psi(args.psi),
                             args.horizon, args.which, args.tail_fraction)
    else:  # subsigned
        tr = subsigned_partial_sums(parse_sign(args.sign, args.horizon),
                                    parse_coeff(args.coeff), args.horizon,
                                    args.tail_fraction)
    return tr, [], {"series": {tr.label: tr.points}, "title": tr.label,
                    "ylabel": "value", "csv_points": tr.points}


def cmd_construct_hamming(args):
    phi = parse_set(args.phi, 10 ** 9)
    psi = get_psi(args.psi)
    nk = select_nk(phi, psi, args.kmax, args.budget)
    w = hamming_coeffs(phi, psi, nk)
    result = {
        "nk": list(w.nk),
        "phi_at_nk": [str(x) for x in w.phi_at_nk],
        "block_denominators": list(w.block_denominators),
        "conditions_recheck": check_nk(phi, psi, nk),
        "max_m": str(w.max_m),
    }
    anomalies = [] if result["conditions_recheck"] else [
        "post-hoc block-condition recheck failed"]
    return result, anomalies, None


def cmd_construct_auerbach(args):
    c = parse_coeff(args.coeff)
    art = auerbach_build(c, k_max=args.kmax, stage_budget=args.stage_budget)
    result = {
        "c": art.c_label,
        "branch_path": [[str(f), str(s)] for f, s in art.branch_path],
        "nk": [str(n) for n in art.nk],
        "block_sums": art.block_sums_str,
        "stage_exceeds": art.stage_exceeds,
    }
    anomalies = [] if all(art.stage_exceeds) else ["a block sum missed its stage index"]
    return result, anomalies, None


def cmd_construct_salat(args):
    ex = salat_example(args.delta, sharpness=args.sharpness)
    blocks = [ex.block_interval(n) for n in range(1, args.blocks + 1)]
    result = {
        "delta": str(ex.delta),
        "a": str(ex.a),
        "blocks": [[str(a), str(b)] for a, b in blocks],
        "plateau_values": [str(ex.coeff_exact(n)) for n in range(1, args.blocks + 1)],
        "sharpness_psi": ex.sharpness_psi,
        "alpha": args.alpha if args.sharpness else None,
    }
    return result, [], None


def _random_abel_instance(rng: random.Random, n_max: int):
    n = rng.randint(2, n_max)
    denom = 2 ** rng.randint(3, 8)
    steps = [rng.randint(0, 4) for _ in range(n)]
    total = sum(steps) + 1
    cs = []
    for s in steps:
        cs.append(Fraction(total, denom))
        total -= s
    members = sorted(rng.sample(range(1, n + 1), rng.randint(1, n)))
    signs = [rng.choice((-1, 0, 1)) for _ in range(n)]
    return n, cs, members, signs


def cmd_verify_abel(args):
    from .intsets import FiniteList
    from .signed import SignSequence

    psi = get_psi("power:p=2")
    rng = random.Random(args.seed)
    worst_plain = 0.0
    worst_signed = 0.0
    exact_fail = 0
    for _ in range(args.trials):
        n, cs, members, signs = _random_abel_instance(rng, args.n)
        c = coeff_sequence(
            generator=lambda k, cs=cs: float(cs[k - 1]),
            label="random-nonincreasing",
            hint="non_increasing",
            exact_generator=lambda k, cs=cs: cs[k - 1],
            max_n=n,
            verify_terms=n,
        )
        A = FiniteList(members)
        m = SignSequence("random-signs",
                         generator=lambda k, s=signs: s[k - 1])
        if args.exact:
            chk = abel_identity_check(c, A, psi, n, mode="exact_rational")
            schk = abel_signed_identity_check(m, c, psi, n, mode="exact_rational")
            if chk.abs_gap != 0 or schk.abs_gap != 0:
                exact_fail += 1
        else:
            chk = abel_identity_check(c, A, psi, n)
            schk = abel_signed_identity_check(m, c, psi, n)
            worst_plain = max(worst_plain, chk.abs_gap / max(1.0, abs(chk.lhs)))
            worst_signed = max(worst_signed, schk.abs_gap / max(1.0, abs(schk.lhs)))
    anomalies = []
    if args.exact and exact_fail:
        anomalies.append(f"{exact_fail} exact instances had non-zero gap")
    if not args.exact and max(worst_plain, worst_signed) > 1e-10:
        anomalies.append("floating gap exceeded 1e-10 relative")
    result = {
        "trials": args.trials,
        "mode": "exact_rational" if args.exact else "compensated",
        "exact_failures": exact_fail if args.exact else None,
        "max_rel_gap_plain": worst_plain if not args.exact else 0.0,
        "max_rel_gap_signed": worst_signed if not args.exact else 0.0,
    }
    return result, anomalies, None


def cmd_verify_toeplitz(args):
    c = parse_coeff(args.coeff).with_hint("c_over_psi_prime_non_increasing")
    psi = get_psi(args.psi)
    summed, closed = toeplitz_row_sums_batch(c, psi, args.nmax)
    gap = float(np.max(np.abs(summed - closed)))
    row4 = toeplitz_rows(c, psi, 4)
    result = {
        "nmax": args.nmax,
        "max_abs_gap": gap,
        "row_sum_final": float(summed[-1]),
        "closed_form_final": float(closed[-1]),
        "example_row_n4": [float(x) for x in row4.row],
    }
    anomalies = [] if gap <= 1e-12 else ["row-sum closed form mismatch"]
    return result, anomalies, None


def cmd_verify_rajagopal(args):
    s = parse_set(args.set_literal, args.horizon)
    rep = rajagopal_means(
        s,
        parse_coeff(args.weights_a),
        parse_coeff(args.weights_b),
        args.horizon,
        tail_fraction=args.tail_fraction,
    )
    anomalies = [] if rep.sandwich_ok else ["weighted-mean sandwich violated"]
    series = {"sigma_a": rep.sigma_a.points, "sigma_b": rep.sigma_b.points}
    return rep, anomalies, {"series": series, "title": "comparison means",
                            "ylabel": "mean"}


def cmd_verify_olivier(args):
    tr = olivier_trace(parse_coeff(args.coeff), get_psi(args.psi),
                       args.horizon, args.tail_fraction)
    anomalies = []
    if args.bound is not None and tr.tail_sup > args.bound:
        anomalies.append(f"tail sup {tr.tail_sup:.3g} exceeds bound {args.bound}")
    return tr, anomalies, {"series": {tr.label: tr.points}, "title": tr.label,
                           "ylabel": "value", "csv_points": tr.points}


def cmd_verify_sandwich(args):
    psi = get_psi(args.psi)
    bad = sandwich_violations(psi, args.nmax)
    result = {"psi": args.psi, "nmax": args.nmax, "violations": bad}
    return result, ([] if bad == 0 else ["sandwich violations found"]), None


def cmd_verify_hamming(args):
    phi = parse_set(args.phi, 10 ** 9)
    psi = get_psi(args.psi)
    nk = select_nk(phi, psi, args.kmax, args.budget)
    w = hamming_coeffs(phi, psi, nk)
    rep = verify_hamming(w, horizon=w.max_m, phi=phi)
    anomalies = []
    if not check_nk(phi, psi, nk):
        anomalies.append("block-condition recheck failed")
    if not rep.monotone_ok:
        anomalies.append("coefficient ratio not non-increasing")
    if not rep.sub_bound_ok:
        anomalies.append("sub-series total exceeded its geometric bound")
    if rep.insufficient_blocks:
        anomalies.append("fewer than 3 complete blocks")
    result = {"nk": list(nk), "report": rep}
    series = {"full partial sums": rep.full_trace.points}
    return result, anomalies, {"series": series, "title": "witness partial sums",
                               "ylabel": "sum"}


def cmd_verify_auerbach(args):
    c = parse_coeff(args.coeff)
    art = auerbach_build(c, k_max=args.kmax, stage_budget=args.stage_budget)
    rep = auerbach_verify(art, get_psi(args.psi), horizon=args.horizon)
    anomalies = []
    if not rep.growth_ok:
        anomalies.append("stage boundaries failed doubling growth")
    if not rep.block_sums_ok:
        anomalies.append("a block sum missed its stage index")
    if not rep.bound_ok:
        anomalies.append("weighted-count decay bound violated")
    result = {
        "nk": [str(n) for n in art.nk],
        "branch_path": [[str(f), str(s)] for f, s in art.branch_path],
        "block_sums": art.block_sums_str,
        "report": rep,
    }
    return result, anomalies, None


def cmd_verify_salat(args):
    ex = salat_example(args.delta)
    rep = salat_example_verify(ex, args.blocks)
    anomalies = []
    for name in ("upper_ok", "lower_ok", "lower_decreasing",
                 "full_mass_lower_ok", "sub_ok", "not_right_ok"):
        if not getattr(rep, name):
            anomalies.append(f"{name} failed")
    series = {
        "ratio at block ends": [(n, r) for n, r, _ in rep.upper_checkpoints],
        "ratio at plateau ends": [(n, r) for n, r, _, _ in rep.lower_checkpoints],
    }
    return rep, anomalies, {"series": series, "title": "counting ratios",
                            "ylabel": "ratio"}


def cmd_verify_sharpness(args):
    ex = salat_example(args.delta, sharpness=True)
    rep = sharpness_verify(ex, args.blocks, args.alpha)
    anomalies = []
    for name in ("psi_concave", "block_weights_ok", "density_ok", "sub_ok"):
        if not getattr(rep, name):
            anomalies.append(f"{name} failed")
    return rep, anomalies, None


def cmd_verify_gasull(args):
    m = parse_sign(args.sign, args.horizon)
    c = parse_coeff(args.coeff).with_hint("c_over_psi_prime_non_increasing")
    psi = get_psi(args.psi)
    rep = signed_decay_traces(m, c, psi, args.horizon, args.tail_fraction)
    sums = subsigned_partial_sums(m, parse_coeff(args.coeff), args.horizon,
                                  args.tail_fraction)
    result = {"decay": rep, "partial_sums": sums}
    series = {
        "signed necessity": rep.necessity.points,
        "density gap": rep.density_gap.points,
        "partial sums": sums.points,
    }
    return result, [], {"series": series, "title": "signed decay traces",
                        "ylabel": "value"}


def cmd_selftest(args):
    checks = []

    def check(name, ok):
        checks.append((name, bool(ok)))

    chk = abel_identity_check(
        parse_coeff("recip"), parse_set("evens"), get_psi("identity"), 10
    )
    check("abel identity (float)", chk.abs_gap <= 1e-12)
    summed, closed = toeplitz_row_sums_batch(
        parse_coeff("recip").with_hint("c_over_psi_prime_non_increasing"),
        get_psi("identity"), 2000,
    )
    check("toeplitz row sums", float(np.max(np.abs(summed - closed))) <= 1e-12)
    check("sandwich identity n<=200", sandwich_violations(get_psi("identity"), 200) == 0)
    check("sandwich log n<=200", sandwich_violations(get_psi("log"), 200) == 0)
    lin = linear_density_report(parse_set("ap:3,3"), 100_000)
    check("density 1/3", abs(lin.final_ratio - 1 / 3) <= 1e-4)
    nk = select_nk(parse_set("squares", 10 ** 9), get_psi("identity"), 5, 10 ** 6)
    check("boundary selection", nk == [0, 1, 2, 3, 5, 11])
    rep = salat_example_verify(salat_example("0.5"), 5)
    check("block example counts", rep.upper_ok and rep.not_right_ok)
    v = divergence_probe(parse_coeff("recip"), parse_set("naturals"), 10.0, 20_000)
    check("harmonic crossing", v.reached and v.at_n == 12367)
    for key in ("identity", "log", "sqrt", "salat-sharpness"):
        val = validate(get_psi(key), 10_000)
        check(f"validate {key}", val.derivative_consistent and val.strictly_increasing)
    ok = all(flag for _, flag in checks)
    result = {"checks": [{"name": n, "ok": f} for n, f in checks], "all_ok": ok}
    return result, ([] if ok else ["selftest failures"]), None


# =====================================================================
# Entry point
# =====================================================================

def _inject_config(argv: list) -> list:
    """Expand --config key=value files into CLI tokens placed before the
    user's own flags, so explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        return argv
    path = argv[i + 1]
    tokens = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "yes"):
            tokens.append(f"--{key}")
        else:
            tokens.extend([f"--{key}", value])
    head = 0
    while head < len(argv) and not argv[head].startswith("-"):
        head += 1
    return argv[:head] + tokens + argv[head:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _inject_config(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result, anomalies, extras = args.func(args)
    except DensityLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.command == "list":
        print("\n".join(result["listing"]))
        return 0

    config = {
        k: v for k, v in vars(args).items()
        if k not in ("func",) and not callable(v)
    }
    config["chunk_size"] = CHUNK
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command + (f" {args.what}" if hasattr(args, "what") else ""),
        "config": config,
        "result": result,
        "anomalies": anomalies,
    }

    if args.format == "csv" and extras and "csv_points" in extras:
        data = trace_csv_bytes(extras["csv_points"])
    else:
        data = render_json(payload)

    if args.out:
        write_bytes(args.out, data)
        print(f"report written to {args.out}")
    else:
        sys.stdout.write(data.decode("utf-8"))

    if args.plot:
        if not args.out:
            print("error: --plot requires --out", file=sys.stderr)
            return 1
        if extras and extras.get("series"):
            from .plotting import figure_path_for, save_series_figure

            figp = figure_path_for(args.out)
            save_series_figure(
                extras["series"], figp,
                title=extras.get("title", ""),
                ylabel=extras.get("ylabel", "value"),
                hlines=extras.get("hlines"),
            )
            print(f"figure written to {figp}")
        else:
            print("note: this recipe has no figure; --plot ignored")

    for a in anomalies:
        print(f"anomaly: {a}", file=sys.stderr)
    return 2 if anomalies else 0


if __name__ == "__main__":
    raise SystemExit(main())
