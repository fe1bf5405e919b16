"""Command-line interface.

Every subcommand writes CSV (comma separated, LF, header row first) to stdout
or ``--out``; summaries and progress go to stderr. Exit codes: 0 success,
1 a checked claim failed, 2 usage error.

Examples::

    primesum sum --n 10
    primesum scan --kind mandl-refined --to 100000
    primesum verify --kind hassani --n 9
    primesum residuals --target sum_m2 --grid-min 10000 --grid-max 10000000
    primesum quadcheck --term x_lnln_x
    primesum report --to 1000000
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import os
import sys
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .analysis import (
    TARGETS,
    GridSpec,
    expansion_relative_errors,
    lemma31_constant_estimate,
    residual_table,
    trend_verdict,
)
from .asymptotics import cipolla_p, sum_expansion
from .errors import MemoryBudgetError
from .inequalities import (
    DEFAULT_REFINED_FORM,
    REFINED_FORMS,
    InequalityKind,
    check,
    scan,
)
from .prime_engine import DEFAULT_MAX_PRIMES, PrimeStore, SieveConfig, build_store, load_store, save_store
from .quadrature import (
    CLAIMS,
    IntegrandTerm,
    euler_sum_check,
    residual_spread,
    verify_term_expansion,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
KINDS = [k.value for k in InequalityKind]


class UsageError(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


class Output:
    """Single CSV writer for a command's data rows."""

    def __init__(self, stream, meta: Sequence[str] = ()):
        self.stream = stream
        for line in meta:
            stream.write(f"# {line}\n")
        self.writer = csv.writer(stream, lineterminator="\n")

    def header(self, *cols: str) -> None:
        self.writer.writerow(cols)

    def row(self, *values) -> None:
        self.writer.writerow([fmt(v) for v in values])

    def rows(self, rows: Iterable[Sequence]) -> None:
        for r in rows:
            self.row(*r)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- argument parsing -----------------------------------------------------------


def _positive(text: str) -> int:
    try:
        value = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0: {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cache", metavar="PATH", help="prime store cache file (PSUMv1)")
    common.add_argument("--max-primes", type=_positive, default=DEFAULT_MAX_PRIMES,
                        help="memory budget in primes (default %(default)s)")
    common.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")
    common.add_argument("--progress", action="store_true", help="progress messages on stderr")
    common.add_argument("--meta", action="store_true", help="prepend a commented provenance header")

    parser = argparse.ArgumentParser(prog="primesum", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, description=help_)

    def grid_opts(p, n_min, n_max, points):
        p.add_argument("--grid-min", type=_positive, default=n_min)
        p.add_argument("--grid-max", type=_positive, default=n_max)
        p.add_argument("--points", type=_positive, default=points)

    for name, what in (("primes", "n,p_n rows"), ("sum", "n,p_n,S_n rows")):
        p = add(name, f"print {what} for --n or for --from..--to")
        p.add_argument("--n", type=_positive)
        p.add_argument("--from", dest="n_from", type=_positive)
        p.add_argument("--to", dest="n_to", type=_positive)

    p = add("approx", "asymptotic approximations to p_n and S_n next to the exact values")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--order", type=int, choices=(0, 1, 2), default=2)
    p.add_argument("--sum-coefficients", choices=("printed", "corrected"), default="printed")

    p = add("verify", "check one inequality at one n (exit 1 if it fails)")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--refined-form", choices=sorted(REFINED_FORMS), default=DEFAULT_REFINED_FORM)

    p = add("scan", "list violations of an inequality over a range")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--from", dest="n_from", type=_positive)
    p.add_argument("--to", dest="n_to", type=_positive, required=True)
    p.add_argument("--refined-form", choices=sorted(REFINED_FORMS), default=DEFAULT_REFINED_FORM)
    p.add_argument("--all", action="store_true", help="emit a row for every n, not only violations")

    p = add("residuals", "residual table for one asymptotic formula")
    p.add_argument("--target", choices=TARGETS)
    p.add_argument("--order", type=int, choices=(0, 1, 2), default=2,
                   help="selects sum_m<order> when --target is not given")
    p.add_argument("--sum-coefficients", choices=("printed", "corrected"), default="printed")
    grid_opts(p, 10**4, 10**7, 13)

    p = add("lemma31", "empirical estimate of the Lemma 3.1 n^2/ln^2 n coefficient")
    p.add_argument("--coefficient", choices=("paper", "derived"), default="derived")
    grid_opts(p, 10**4, 10**7, 13)

    p = add("quadcheck", "numeric check of the term-by-term integral expansions")
    p.add_argument("--term", choices=[t.term_id for t in IntegrandTerm])
    p.add_argument("--tol", type=_positive_float, default=1e-13)
    grid_opts(p, 10**3, 10**6, 4)

    p = add("report", "summary of every checkable claim")
    p.add_argument("--to", dest="n_to", type=_positive, default=10**6)
    p.add_argument("--coefficient", choices=("paper", "derived"), default="derived")
    p.add_argument("--refined-form", choices=sorted(REFINED_FORMS), default=DEFAULT_REFINED_FORM)
    return parser


def _validate(args) -> int:
    """Check option combinations; return the number of primes the command needs."""
    cmd = args.command
    if cmd in ("primes", "sum"):
        if args.n is not None:
            if args.n_from is not None or args.n_to is not None:
                raise UsageError("use either --n or --from/--to")
            args.n_from = args.n_to = args.n
        if args.n_to is None:
            raise UsageError("--n or --to is required")
        if args.n_from is None:
            args.n_from = 1
        if args.n_from > args.n_to:
            raise UsageError("--from must not exceed --to")
        return args.n_to
    if cmd == "approx":
        if args.n < 3:
            raise UsageError("approximations need --n >= 3")
        return args.n
    if cmd == "verify":
        kind = InequalityKind.parse(args.kind)
        if args.n < kind.min_n:
            raise UsageError(f"{kind.value} needs --n >= {kind.min_n}")
        return args.n
    if cmd == "scan":
        kind = InequalityKind.parse(args.kind)
        if args.n_from is None:
            args.n_from = kind.min_n
        if kind is InequalityKind.ROBIN and args.n_from < 4:
            raise UsageError("robin needs --from >= 4")
        if args.n_from > args.n_to:
            raise UsageError("--from must not exceed --to")
        return args.n_to
    if cmd in ("residuals", "lemma31", "quadcheck"):
        lowest = {"residuals": 10, "lemma31": 10**4, "quadcheck": 10}[cmd]
        if args.grid_min < lowest:
            raise UsageError(f"--grid-min must be >= {lowest}")
        if args.grid_max <= args.grid_min or args.points < 3:
            raise UsageError("need --grid-max > --grid-min and --points >= 3")
        return 0 if cmd == "quadcheck" else args.grid_max
    if cmd == "report":
        if args.n_to <= 10**4:
            raise UsageError("report needs --to > 10000")
        return args.n_to
    raise UsageError(f"unknown command {cmd}")


# -- store acquisition ------------------------------------------------------------


def _store(args, needed: int) -> PrimeStore:
    progress = _note if args.progress else None
    if args.cache and os.path.exists(args.cache):
        store = load_store(args.cache)
        if store.count >= needed:
            if progress:
                progress(f"loaded {store.count} primes from {args.cache}")
            return store
    if needed > args.max_primes:
        raise MemoryBudgetError(f"{needed} primes needed, --max-primes is {args.max_primes}")
    store = build_store(SieveConfig(needed, max_primes=args.max_primes), progress)
    if args.cache:
        save_store(store, args.cache)
    return store


# -- commands -----------------------------------------------------------------------


def cmd_primes(args, store, out: Output) -> int:
    out.header("n", "p_n")
    out.rows((n, p) for n, p, _ in store.stream_triples(args.n_from, args.n_to))
    return EXIT_OK


def cmd_sum(args, store, out: Output) -> int:
    out.header("n", "p_n", "S_n")
    out.rows(store.stream_triples(args.n_from, args.n_to))
    return EXIT_OK


def cmd_approx(args, store, out: Output) -> int:
    n = args.n
    out.header("n", "order", "p_n", "cipolla_p", "S_n", "sum_expansion")
    out.row(n, args.order, store.nth_prime(n), cipolla_p(n, args.order), store.prefix_sum(n),
            sum_expansion(n, args.order, args.sum_coefficients))
    return EXIT_OK


def cmd_verify(args, store, out: Output) -> int:
    rec = check(args.kind, args.n, store, args.refined_form)
    out.header("n", "kind", "holds", "margin", "guarded")
    out.row(rec.n, rec.kind.value, rec.holds, rec.margin, rec.guarded)
    if not rec.holds:
        _note(f"{rec.kind.value} fails at n={rec.n} (margin {fmt(rec.margin)})")
    return EXIT_OK if rec.holds else EXIT_FAIL


def cmd_scan(args, store, out: Output) -> int:
    kind = InequalityKind.parse(args.kind)
    out.header("n", "holds", "margin")

    def emit(blk) -> None:
        holds = np.asarray(blk.margin > 0, dtype=bool)
        keep = np.ones(holds.size, dtype=bool) if args.all else ~holds
        for k in np.flatnonzero(keep):
            m = blk.margin[k]
            out.row(int(blk.n[k]), bool(holds[k]), m.item() if isinstance(m, np.generic) else m)

    report = scan(kind, args.n_from, args.n_to, store, args.refined_form, on_block=emit)
    largest = report.largest_violation
    _note(
        f"{kind.value} [{report.n_lo}, {report.n_hi}]: {len(report.violations)} violations, "
        f"largest {largest if largest is not None else 'none'}, threshold {report.threshold}, "
        f"{len(report.guarded)} guarded, {len(report.flipped)} flipped"
    )
    bad = report.violations_in_claimed_range()
    if bad:
        _note(f"violations inside the claimed range n >= {kind.claimed_from}: first {bad[0]}")
        return EXIT_FAIL
    return EXIT_OK


def _grid(args) -> GridSpec:
    return GridSpec(args.grid_min, args.grid_max, args.points)


def cmd_residuals(args, store, out: Output) -> int:
    target = args.target or f"sum_m{args.order}"
    rows = residual_table(target, _grid(args), store, args.sum_coefficients)
    out.header("n", "exact", "approx", "abs_err", "scaled_err")
    out.rows((r.n, r.exact, r.approx, r.abs_err, r.scaled_err) for r in rows)
    v = trend_verdict(rows)
    _note(f"{target}: {v.verdict} (slope {v.slope:.4f})")
    return EXIT_OK


def cmd_lemma31(args, store, out: Output) -> int:
    grid = _grid(args)
    est = lemma31_constant_estimate(grid, store)
    rows = residual_table(f"lemma31_{args.coefficient}", grid, store)
    out.header("n", "c_hat", "scaled_err")
    out.rows((n, c, r.scaled_err) for (n, c), r in zip(est.points, rows))
    _note(f"c_hat({est.points[-1][0]}) = {est.final:.6g}; nearer candidate: "
          f"{est.nearer.name.lower()} ({8 * est.nearer.value})")
    return EXIT_OK


def cmd_quadcheck(args, store, out: Output) -> int:
    terms = [IntegrandTerm.from_id(args.term)] if args.term else list(IntegrandTerm)
    grid = _grid(args).values()
    out.header("term", "n", "numeric", "closed_form", "scaled_residual")
    status = EXIT_OK
    for term in terms:
        rows = verify_term_expansion(term, grid, args.tol)
        out.rows((term.term_id, r.n, r.numeric, r.closed_form, r.scaled_residual) for r in rows)
        spread = residual_spread(rows)
        _note(f"{term.term_id}: spread {spread:.4g} (error scale L^-{CLAIMS[term].error_exponent})")
        if not spread < 10:
            status = EXIT_FAIL
    return status


def cmd_report(args, store, out: Output) -> int:
    n_hi = args.n_to
    out.header("claim", "value", "expected", "status")
    status = EXIT_OK
    for kind in InequalityKind:
        rep = scan(kind, kind.min_n, n_hi, store, args.refined_form)
        expected = kind.claimed_from
        if expected is None:
            verdict = "info"
        elif rep.violations_in_claimed_range():
            verdict, status = "fail", EXIT_FAIL
        else:
            verdict = "pass" if rep.threshold <= expected else "fail"
        out.row(f"{kind.value}_threshold", rep.threshold, "" if expected is None else expected, verdict)
    n_acc = min(n_hi, 10**6)
    for coeffs in ("printed", "corrected"):
        errs = expansion_relative_errors(n_acc, store, coeffs)
        for m, e in enumerate(errs):
            out.row(f"sum_rel_err_m{m}_{coeffs}_n{n_acc}", e, "", "info")
    est = lemma31_constant_estimate(GridSpec(10**4, n_hi, 7), store)
    out.row(f"lemma31_c_hat_n{n_hi}", est.final, "", "info")
    out.row("lemma31_nearer", 8 * float(est.nearer.value), "", "info")
    (row,) = residual_table(f"lemma31_{args.coefficient}", [n_hi], store)
    out.row(f"lemma31_{args.coefficient}_scaled_err_n{n_hi}", row.scaled_err, "", "info")
    for term in IntegrandTerm:
        spread = residual_spread(verify_term_expansion(term, [10**3, 10**4, 10**5, 10**6]))
        ok = spread < 10
        status = status if ok else EXIT_FAIL
        out.row(f"quad_spread_{term.term_id}", spread, "<10", "pass" if ok else "fail")
    for f_id in ("sqrt", "ln", "x_ln_x"):
        ratio = max(euler_sum_check(f_id, n).bound_ratio for n in (2, 10, 10**3, 10**5))
        ok = ratio <= 1
        status = status if ok else EXIT_FAIL
        out.row(f"euler_ratio_{f_id}", ratio, "<=1", "pass" if ok else "fail")
    return status


COMMANDS = {
    "primes": cmd_primes,
    "sum": cmd_sum,
    "approx": cmd_approx,
    "verify": cmd_verify,
    "scan": cmd_scan,
    "residuals": cmd_residuals,
    "lemma31": cmd_lemma31,
    "quadcheck": cmd_quadcheck,
    "report": cmd_report,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        needed = _validate(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        _note(f"primesum: error: {exc}")
        return EXIT_USAGE
    try:
        store = _store(args, needed) if needed else None
    except MemoryBudgetError as exc:
        _note(f"primesum: error: {exc}")
        return EXIT_USAGE
    meta = ()
    if args.meta:
        shown = list(argv) if argv is not None else sys.argv[1:]
        meta = (f"primesum {__version__}", "command: primesum " + " ".join(shown))
    with contextlib.ExitStack() as stack:
        stream = sys.stdout
        if args.out:
            stream = stack.enter_context(open(args.out, "w", newline="", encoding="utf-8"))
        return COMMANDS[args.command](args, store, Output(stream, meta))


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
