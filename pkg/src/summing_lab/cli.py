"""Command-line interface: norms, summing-norm estimates, counterexample trends and property suites.

Every command prints a JSON report (schema "1") that embeds the configuration
that produced it; ``--config REPORT.json`` re-runs that configuration. Exit
codes: 0 success, 1 an assertion failed, 2 usage or precondition error.
"""

from __future__ import annotations

import argparse
import csv
import io
import re
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .core import DIVERGES, Budget, NormEstimate, TailModel, VecSeq, as_exponent, lp_norm, strong_norm
from .counterexamples import (
    HypothesisViolation,
    case1_kronecker,
    case2_construct,
    case3_construct,
    cor312_construct,
    holder_embedding_check,
)
from .formats import dumps, load_json, load_matrix, load_sequence
from .oplimited import (
    chain_check,
    known_pi_p,
    limited_certificate,
    lt_p_lower,
    opsum_check,
    seq_limited_check,
)
from .operators import OperatorMat, exact_norm, make_Ex, norm_bound, op_norm, weak_star_norm
from .oracle import CapExceeded, signvec_pi1
from .summing import pi_1_Ealpha_exact, pi_2_hilbert_exact, pi_p_dual, pi_p_lower

SCHEMA = "1"
LEMMA_ALPHA = [[1.0, 0.5], [0.25, 0.0]]
NOT_CONFIG = {"out", "config", "handler"}


class UsageError(ValueError):
    """Invalid configuration detected after argument parsing."""


# ----------------------------------------------------------------------------
# helpers


def _estimate(e) -> dict:
    if e == DIVERGES:
        return {"value": None, "kind": DIVERGES}
    return e.to_dict()


def _bracket(e):
    if e == DIVERGES:
        return float("inf"), float("inf")
    return e.bracket


def _assertion(name: str, passed: bool, detail: str = "") -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


_CMP = re.compile(r"^\s*([a-z_]+)\s*(<=|>=|<|>)\s*([a-z_]+)\s*$")


def _check_relation(text: str, values: dict, tol: float) -> dict:
    """Evaluate "a<=b" style assertions on estimates; fails only when the brackets refute it."""
    m = _CMP.match(text)
    if not m or m.group(1) not in values or m.group(3) not in values:
        raise UsageError(f"cannot parse assertion {text!r}; names: {sorted(values)}")
    left, op, right = m.groups()
    if op in (">=", ">"):
        left, right = right, left
    lo_left, _ = _bracket(values[left])
    _, hi_right = _bracket(values[right])
    strict = op in ("<", ">")
    ok = lo_left < hi_right + tol if strict else lo_left <= hi_right + tol
    return _assertion(text, ok, f"lower({left})={lo_left!r}, upper({right})={hi_right!r}")


def _rows_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "value", "kind", "upper"])
    for name, e in rows:
        d = _estimate(e)
        w.writerow([name, repr(d["value"]), d["kind"], repr(d.get("upper", ""))])
    return buf.getvalue()


def _fraction(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _budget(args) -> Budget:
    try:
        return Budget.parse(args.budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ----------------------------------------------------------------------------
# commands


def _sequence(args) -> VecSeq:
    q = as_exponent(args.q)
    if args.seq == "file":
        if not args.file:
            raise UsageError("--seq file needs --file")
        return load_sequence(args.file)
    if args.d < 1:
        raise UsageError("--d must be >= 1")
    if args.seq == "basis":
        return VecSeq.basis(args.d, q)
    n = args.n or args.d
    return VecSeq(np.random.default_rng(args.seed).standard_normal((n, args.d)), q)


def cmd_norm(args):
    p = as_exponent(args.p)
    x = _sequence(args)
    budget = _budget(args)
    strong = strong_norm(x, p)
    head = x if x.is_finite else x.truncate(x.n)
    weak = op_norm(make_Ex(head, p), budget, args.seed)
    weak_star = weak_star_norm(head, p, budget, args.seed)
    if not x.is_finite:
        # values of the head alone bound the full sequence from below
        weak = NormEstimate(weak.value, "lower", "head-only:" + weak.method, seed=weak.seed)
        weak_star = NormEstimate(weak_star.value, "lower", "head-only:" + weak_star.method, seed=weak_star.seed)
    values = {"strong": strong, "weak": weak, "weak_star": weak_star}
    assertions = [_check_relation(a, values, args.tol) for a in args.assertions]
    results = {"n": x.n, "dim": x.dim, "q": str(x.q), "p": str(p),
               "norms": {k: _estimate(v) for k, v in values.items()}}
    return results, assertions, _rows_csv(values.items())


def _operator(args) -> tuple[OperatorMat, str]:
    if args.matrix:
        return load_matrix(args.matrix), "file"
    if args.gen == "lemma43":
        return OperatorMat(np.array(LEMMA_ALPHA).T, "inf", 1), "lemma43"
    if args.d < 1:
        raise UsageError("--d must be >= 1")
    dom, cod = as_exponent(args.domain), as_exponent(args.codomain)
    if args.gen == "identity":
        return OperatorMat(np.eye(args.d), dom, cod), "identity"
    M = np.random.default_rng(args.seed).standard_normal((args.d, args.d))
    return OperatorMat(M, dom, cod), "random"


def cmd_summing(args):
    p = as_exponent(args.p)
    if p.is_inf:
        raise UsageError("p must be finite")
    T, source = _operator(args)
    budget = _budget(args)
    m = args.m
    values = {}
    values["pi_p"] = pi_p_lower(T, p, m, budget, args.seed)
    values["pi_p_dual"] = pi_p_dual(T, p, m, budget, args.seed)
    if not args.no_lt:
        values["lt_p"] = lt_p_lower(T, p, seed=args.seed)
    assertions = []
    exact = known_pi_p(T, p)
    if exact is not None:
        values["pi_p_exact"] = NormEstimate(exact, "exact", "closed-form")
        if p.value == 2:
            values["pi_p_exact"] = pi_2_hilbert_exact(T)
        lo = values["pi_p"].value
        assertions.append(_assertion("search <= exact", lo <= exact + args.tol, f"{lo!r} vs {exact!r}"))
    if source == "lemma43":
        alpha = VecSeq(np.array(LEMMA_ALPHA), 1)
        values["pi_1_Ealpha_exact"] = pi_1_Ealpha_exact(alpha)
    if T.domain.is_inf and p.value == 1 and T.d_in <= 10:
        try:
            oracle = signvec_pi1(T, T.d_in)
        except CapExceeded:
            oracle = None
        if oracle is not None:
            values["oracle_signvec"] = oracle
            if exact is not None:
                assertions.append(_assertion("oracle within 5% of exact",
                                             0.95 * exact <= oracle.value <= exact + args.tol,
                                             f"{oracle.value!r} vs {exact!r}"))
    if T.d_in and T.entries.any():
        on = op_norm(T, budget, args.seed)
        values["op_norm"] = on
        assertions.append(_assertion("pi_p >= norm", values["pi_p"].value >= on.value - args.tol))
    results = {"source": source, "operator": T.to_dict(), "p": str(p),
               "estimates": {k: _estimate(v) for k, v in values.items()}}
    return results, assertions, _rows_csv(values.items())


def _default_nmax(case: str) -> int:
    return {"case1": 2**14, "holder": 10**4}.get(case, 10**6)


def cmd_counterexample(args):
    case = args.case
    nmax = args.nmax or _default_nmax(case)
    assertions = []
    try:
        if case == "holder":
            alpha = TailModel.power_log(args.c, _fraction(args.gamma), _fraction(args.kappa))
            ns = [10**k for k in range(1, 20) if 10**k <= nmax] or [nmax]
            rep = holder_embedding_check(alpha, args.s, args.p, ns)
            assertions.append(_assertion("zero violations", rep.violations == 0, f"{rep.violations} violations"))
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["N", "weak_norm", "t_norm_lower"])
            for n, v in zip(rep.truncations, rep.weak_norms):
                w.writerow([n, repr(v), repr(rep.t_norm_bracket[0])])
            return {"case": case, "report": rep.to_dict()}, assertions, buf.getvalue()
        if case == "case1":
            res = case1_kronecker(args.p, args.r, nmax)
            r = as_exponent(args.r)
            slope_ok = abs(res.trend.fitted_slope - 1 / float(r)) <= 1e-3
            assertions.append(_assertion("slope = 1/r within 1e-3", slope_ok, repr(res.trend.fitted_slope)))
            assertions.append(_assertion("basis families weakly r-bounded by 1", res.extra["bounded"]))
        elif case == "case2":
            res = case2_construct(args.p, args.r, nmax)
        elif case == "case3":
            res = case3_construct(args.p, args.r, nmax)
        else:
            if args.s is None:
                raise UsageError("cor312 needs --s")
            res = cor312_construct(args.p, args.r, args.s, nmax, beta_zero=args.beta_zero)
    except HypothesisViolation as exc:
        raise UsageError(str(exc)) from exc
    if case in ("case2", "case3", "cor312"):
        *members, last = res.certificates
        expect_div = not (case == "cor312" and args.beta_zero)
        assertions.append(_assertion("memberships certified", all(c.converges for c in members)))
        assertions.append(_assertion("divergence certified" if expect_div else "series converges",
                                     last.converges != expect_div))
        assertions.append(_assertion("trend verdict", res.verdict == ("diverging" if expect_div else "bounded"),
                                     res.verdict))
    assertions.append(_assertion("values nondecreasing", res.trend.is_nondecreasing))
    return {"case": case, "result": res.to_dict()}, assertions, res.trend.to_csv()


def _suite_pairing(rng, args, p):
    n, d = args.n or args.d, args.d
    X = rng.standard_normal((n, d))
    F = rng.standard_normal((n, d))
    lhs = float(np.sum(np.abs(F @ X.T) ** float(p)))
    ws, exact = norm_bound(F, 2, p)
    st = float(lp_norm(lp_norm(X, 2, axis=1), p))
    rhs = (float(ws) * st) ** float(p)
    return lhs <= rhs * (1 + 1e-9), {"lhs": lhs, "rhs": rhs, "exact_path": bool(exact)}


def _suite_chain(rng, args, p):
    x = VecSeq(rng.standard_normal((args.n or args.d, args.d)), 2)
    rep = chain_check(x, p, tol=args.tol, seed=args.seed)
    return rep.ok, rep.to_dict()


def _suite_certificate(rng, args, p):
    n, d = args.n or args.d, args.d
    x = VecSeq(rng.standard_normal((n, d)), 2)
    f = VecSeq(rng.standard_normal((n, d)), 2)
    cert = limited_certificate(x, f, p)
    worst = 0.0
    for _ in range(5):
        beta = rng.standard_normal(n)
        beta /= lp_norm(beta, p.dual)
        z = beta @ x.head
        worst = max(worst, float(np.max(np.abs(f.head @ z) - cert.alphas)))
    return worst <= 1e-9 * max(1.0, float(cert.alphas.max())), {"max_excess": worst}


def _suite_equivalence(rng, args, p, i):
    if i % 2:
        N = 16 * (1 + i % 3)
        x = f = VecSeq.basis(N, 2)
    else:
        x = VecSeq(rng.standard_normal((args.n or args.d, args.d)), 2)
        f = VecSeq(rng.standard_normal((args.n or args.d, args.d)), 2)
    has_cert = limited_certificate(x, f, p) is not None
    summable = opsum_check(x, f, p).verdict == "summable-at-truncation"
    return has_cert == summable, {"certificate": has_cert, "summable": summable}


def _suite_hilbert(rng, args, p):
    d = args.d
    T = OperatorMat(rng.standard_normal((d, d)), 2, 2)
    x = VecSeq(rng.standard_normal((args.n or d, d)), 2)
    rep = seq_limited_check(T, x, 2, seed=args.seed)
    bound = pi_2_hilbert_exact(T).value * float(exact_norm(make_Ex(x, 2).entries, 2, 2)[0])
    return rep.aggregate <= bound + args.tol, {"aggregate": rep.aggregate, "bound": bound}


SUITES = ("pairing-bound", "chain", "certificate", "equivalence", "hilbert")


def cmd_check(args):
    if args.count < 1:
        raise UsageError("empty corpus: --count must be >= 1")
    if args.d < 1:
        raise UsageError("--d must be >= 1")
    p = as_exponent(args.p)
    if p.is_inf:
        raise UsageError("p must be finite")
    if args.suite == "hilbert" and p.value != 2:
        raise UsageError("the hilbert suite runs at p = 2")
    failures = []
    for i in range(args.count):
        rng = np.random.default_rng([args.seed, i])
        if args.suite == "equivalence":
            ok, detail = _suite_equivalence(rng, args, p, i)
        else:
            fn = {"pairing-bound": _suite_pairing, "chain": _suite_chain,
                  "certificate": _suite_certificate, "hilbert": _suite_hilbert}[args.suite]
            ok, detail = fn(rng, args, p)
        if not ok:
            failures.append({"instance": i, **detail})
    results = {"suite": args.suite, "instances": args.count, "violations": len(failures),
               "failures": failures[:10]}
    assertions = [_assertion("zero violations", not failures, f"{len(failures)} of {args.count}")]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "instances", "violations"])
    w.writerow([args.suite, args.count, len(failures)])
    return results, assertions, buf.getvalue()


# ----------------------------------------------------------------------------
# parser


def _common(sp):
    sp.add_argument("--p", default="2", help="summability exponent p (e.g. 2, 3/2, 1.5, inf)")
    sp.add_argument("--budget", default="32x500", help="search budget STARTSxITERS (default 32x500)")
    sp.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    sp.add_argument("--tol", type=float, default=1e-9, help="slack for assertions")
    sp.add_argument("--out", help="also write the report to this file")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--config", help="re-run the configuration embedded in a previous JSON report "
                    "(other options except --out are ignored)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="summing-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("norm", help="strong, weak and weak* norms of a vector sequence")
    _common(sp)
    sp.add_argument("--seq", choices=("basis", "random", "file"), default="basis")
    sp.add_argument("--file", help="sequence JSON file (with --seq file)")
    sp.add_argument("--d", type=int, default=4, help="ambient dimension")
    sp.add_argument("--n", type=int, default=None, help="number of vectors for --seq random (default d)")
    sp.add_argument("--q", default="2", help="ambient exponent (vectors live in l_q^d)")
    sp.add_argument("--assert", dest="assertions", action="append", default=[],
                    help="relation to check, e.g. weak<=strong (repeatable)")
    sp.set_defaults(handler=cmd_norm)

    sp = sub.add_parser("summing", help="pi_p, dual pi_p and lt_p estimates for a matrix")
    _common(sp)
    sp.add_argument("--matrix", help="matrix JSON file")
    sp.add_argument("--gen", choices=("identity", "random", "lemma43"), default="identity",
                    help="generated operator when no --matrix is given; lemma43 is E_alpha for a fixed l_1 pair")
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--domain", default="2")
    sp.add_argument("--codomain", default="2")
    sp.add_argument("--m", type=int, default=None, help="largest witness tuple size (default min(d_in, 6))")
    sp.add_argument("--no-lt", action="store_true", help="skip the lt_p outer search")
    sp.set_defaults(handler=cmd_summing)

    sp = sub.add_parser("counterexample", help="growth trends of the explicit non-summable constructions")
    _common(sp)
    sp.add_argument("case", choices=("case1", "case2", "case3", "cor312", "holder"))
    sp.add_argument("--r", default="2")
    sp.add_argument("--s", default=None)
    sp.add_argument("--nmax", type=int, default=None)
    sp.add_argument("--c", type=float, default=1.0, help="holder: coefficient scale")
    sp.add_argument("--gamma", default="1", help="holder: power exponent of alpha_n")
    sp.add_argument("--kappa", default="2", help="holder: log exponent of alpha_n")
    sp.add_argument("--beta-zero", action="store_true", help="cor312: use beta = 0 (bounded sanity run)")
    sp.set_defaults(handler=cmd_counterexample)

    sp = sub.add_parser("check", help="run a property suite over a seeded random corpus")
    _common(sp)
    sp.add_argument("suite", choices=SUITES)
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--n", type=int, default=None, help="sequence length (default d)")
    sp.set_defaults(handler=cmd_check, tol=None)
    return parser


HANDLERS = {"norm": cmd_norm, "summing": cmd_summing, "counterexample": cmd_counterexample, "check": cmd_check}


def _namespace(argv) -> argparse.Namespace:
    # a --config run takes everything but --out from the embedded config, so it
    # must not trip over positionals the original command required
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("--out")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = load_json(known.config).get("config")
        if not isinstance(cfg, dict) or cfg.get("command") not in HANDLERS:
            raise UsageError(f"{known.config} does not embed a runnable config")
        args = argparse.Namespace(**cfg)
        args.out, args.config = known.out, None
    else:
        args = build_parser().parse_args(argv)
    if args.command == "check" and args.tol is None:
        args.tol = 1e-3
    return args


def main(argv=None) -> int:
    try:
        args = _namespace(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    config = {k: v for k, v in sorted(vars(args).items()) if k not in NOT_CONFIG}
    start = time.perf_counter()
    try:
        results, assertions, csv_text = HANDLERS[args.command](args)
    except (ValueError, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    passed = all(a["passed"] for a in assertions)
    report = {"schema": SCHEMA, "command": args.command, "config": config, "results": results,
              "assertions": assertions, "passed": passed,
              "wall_time": round(time.perf_counter() - start, 6)}
    text = dumps(report) if args.format == "json" else csv_text
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
