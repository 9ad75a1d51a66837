"""Command-line entry point: ``bnquant <command> ...``.

Every command prints a human-readable summary by default and a single JSON
object with ``--json``.  Exit status: 0 success, 1 verification failure,
2 model schema error, 3 unsolvable layer or scale, 4 sequence budget
exceeded, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from . import bnfold
from ._rational import to_fraction
from .convert import DegenerateSign, FixedAffine, NoSolution, QuantRange, solve_tb
from .oracle import DEFAULT_MARGIN, verify_equivalence
from .scale_search import (
    ScaleSearchConfig,
    kn_bounds,
    list_satisfied_k,
    next_satisfied_k,
    search_kn,
)
from .seqgen import DEFAULT_BUDGET, DEFAULT_WINDOW, SequenceBudgetExceeded, enumerate_sequences, write_sequences

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_SCHEMA = 2
EXIT_NO_SOLUTION = 3
EXIT_BUDGET = 4
EXIT_USAGE = 64

log = logging.getLogger("bnquant")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _rational(text: str):
    try:
        return to_fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _range(args) -> QuantRange:
    try:
        return QuantRange(args.ymin, args.ymax)
    except ValueError as exc:
        raise UsageError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--threads", type=_positive, default=1, help="worker cap")

    p = _Parser(prog="bnquant", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("search-kn", parents=[common], help="least satisfied scale K_n")
    s.add_argument("--n", type=_positive, required=True, nargs="+")
    s.add_argument("--start", type=_positive, default=None)
    s.add_argument("--window", type=_positive, default=DEFAULT_WINDOW)
    s.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)

    s = sub.add_parser("list-k", parents=[common], help="satisfied scales up to a maximum")
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--max", dest="k_max", type=_positive, required=True)
    s.add_argument("--no-shortcut", action="store_true", help="check scales above the blanket bound too")

    s = sub.add_parser("bounds", parents=[common], help="proven bracket for K_n")
    s.add_argument("--n", type=_positive, required=True)

    s = sub.add_parser("sequences", parents=[common], help="dump realizable ceiling sequences")
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--out", default="-")

    s = sub.add_parser("convert", parents=[common], help="integer (T, B) for a given (t, b)")
    s.add_argument("--t", type=_rational, required=True)
    s.add_argument("--b", type=_rational, required=True)
    s.add_argument("--k", type=_positive, required=True)
    s.add_argument("--ymin", type=int, default=0)
    s.add_argument("--ymax", type=int, required=True)
    s.add_argument("--all", action="store_true")

    s = sub.add_parser("verify", parents=[common], help="check (T, B, K) against (t, b)")
    s.add_argument("--t", type=_rational, required=True)
    s.add_argument("--b", type=_rational, required=True)
    s.add_argument("--T", dest="T", type=int, required=True)
    s.add_argument("--B", dest="B", type=int, required=True)
    s.add_argument("--k", type=_positive, required=True)
    s.add_argument("--ymin", type=int, default=0)
    s.add_argument("--ymax", type=int, required=True)
    s.add_argument("--margin", type=_positive, default=DEFAULT_MARGIN)

    s = sub.add_parser("fold", parents=[common], help="fold every BN layer of a model document")
    s.add_argument("--model", required=True)
    s.add_argument("--k", type=_positive, default=None, help="shared scale (default: per bit-width)")
    s.add_argument("--out", required=True)
    s.add_argument("--margin", type=_positive, default=DEFAULT_MARGIN)

    s = sub.add_parser("compare", parents=[common], help="layerwise agreement of float, bt and BT paths")
    s.add_argument("--model", required=True)
    s.add_argument("--folded", required=True)
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    return p


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def cmd_search_kn(args) -> int:
    rows = []
    for n in args.n:
        cfg = ScaleSearchConfig(n, k0=args.start, window=args.window, budget=args.budget, workers=args.threads)
        res = search_kn(cfg)
        log.info("n=%d K_n=%d (%d sequences, %.3fs)", n, res.kn, res.sequence_count, res.elapsed)
        rows.append(res.as_dict())
    if args.json:
        print(json.dumps(rows[0] if len(rows) == 1 else rows, sort_keys=True))
    elif len(rows) == 1:
        print(rows[0]["kn"])
    else:
        print(f"{'n':>4} {'K_n':>7} {'lower':>7} {'upper':>7} {'seqs':>8} {'sec':>8}")
        for r in rows:
            print(f"{r['n']:>4} {r['kn']:>7} {r['lower']:>7} {r['upper']:>7} {r['sequences']:>8} {r['elapsed']:>8.3f}")
    return EXIT_OK


def cmd_list_k(args) -> int:
    ks = list_satisfied_k(args.n, args.k_max, shortcut=not args.no_shortcut)
    _emit(args, {"n": args.n, "max": args.k_max, "satisfied": ks}, ", ".join(map(str, ks)))
    return EXIT_OK


def cmd_bounds(args) -> int:
    lo, hi = kn_bounds(args.n)
    _emit(args, {"n": args.n, "lower": lo, "upper": hi}, f"{lo} <= K_{args.n} <= {hi}")
    return EXIT_OK


def cmd_sequences(args) -> int:
    seqs = enumerate_sequences(args.n)
    if args.out == "-":
        for row in seqs:
            print(",".join(str(int(v)) for v in row))
    else:
        count = write_sequences(args.out, seqs)
        print(count, file=sys.stderr)
    return EXIT_OK


def cmd_convert(args) -> int:
    rng = _range(args)
    if args.t == 0:
        raise UsageError("--t must be nonzero")
    try:
        found = solve_tb(args.t, args.b, args.k, rng, mode="all" if args.all else "first")
    except DegenerateSign as exc:
        th = exc.threshold
        payload = {"sign": th.as_dict(), "range": [rng.y_min, rng.y_max]}
        high = f"N > {th.n0}" if th.increasing else f"N < {th.n0}"
        _emit(args, payload, f"sign threshold: {rng.y_max} if {high} else {rng.y_min}")
        return EXIT_OK
    except NoSolution as exc:
        suggested = next_satisfied_k(rng.width, args.k)
        payload = {
            "error": "NoSolution",
            "message": str(exc),
            "sequence": list(exc.sequence.s) if exc.sequence else None,
            "suggested_k": suggested,
        }
        if args.json:
            print(json.dumps(payload, sort_keys=True))
        else:
            print(f"error: {exc}", file=sys.stderr)
            if exc.sequence:
                print(f"failing sequence: {exc.sequence}", file=sys.stderr)
            print(f"next satisfied K for n={rng.width}: {suggested}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    pairs = [fa.as_dict() for fa in found]
    text = "\n".join(f"T={fa.T} B={fa.B} K={fa.K}" for fa in found)
    _emit(args, {"t": str(args.t), "b": str(args.b), "range": [rng.y_min, rng.y_max], "pairs": pairs}, text)
    return EXIT_OK


def cmd_verify(args) -> int:
    rng = _range(args)
    if args.T == 0:
        raise UsageError("--T must be nonzero")
    if args.t == 0:
        raise UsageError("--t must be nonzero")
    fa = FixedAffine(args.T, args.B, args.k, rng)
    report = verify_equivalence(args.t, args.b, fa, args.margin)
    if report.certified:
        text = f"certified: {report.checked_count} inputs over window {report.window[0]}..{report.window[1]}"
    else:
        n, lhs, rhs = report.first_failure
        text = f"mismatch at N={n}: float side {lhs}, fixed side {rhs} ({len(report.mismatches)} mismatches)"
    _emit(args, report.as_dict(), text)
    return EXIT_OK if report.certified else EXIT_MISMATCH


def cmd_fold(args) -> int:
    try:
        doc = bnfold.load_document(args.model)
        outcome = bnfold.fold_model(doc, k=args.k, margin=args.margin, workers=args.threads)
    except bnfold.SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(bnfold.dump_document(outcome.document))
    for notice in outcome.notices:
        log.warning(notice)
    for name in outcome.failed:
        print(f"layer {name!r}: no solution at this K", file=sys.stderr)
    payload = {"certified": outcome.certified, "failed": outcome.failed, "out": args.out}
    _emit(args, payload, f"{outcome.certified} layers certified, {len(outcome.failed)} failed -> {args.out}")
    return EXIT_NO_SOLUTION if outcome.failed else EXIT_OK


def cmd_compare(args) -> int:
    try:
        report = bnfold.simulate_compare(
            bnfold.load_document(args.model), bnfold.load_document(args.folded), args.samples, args.seed
        )
    except (bnfold.SchemaError, OSError) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        for row in report["layers"]:
            if "skipped" in row:
                print(f"{row['name']}: skipped ({row['skipped']})")
                continue
            pts = row["points"]
            print(f"{row['name']}: float=bt {row['float_bt']}/{pts}  bt=BT {row['bt_BT']}/{pts}")
        print(f"bt=BT agreement {100 * report['agreement']:.2f}%")
    ok = report["bt_BT"] == report["points"] and report["float_bt"] == report["points"]
    return EXIT_OK if ok else EXIT_MISMATCH


COMMANDS = {
    "search-kn": cmd_search_kn,
    "list-k": cmd_list_k,
    "bounds": cmd_bounds,
    "sequences": cmd_sequences,
    "convert": cmd_convert,
    "verify": cmd_verify,
    "fold": cmd_fold,
    "compare": cmd_compare,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        level = logging.WARNING - 10 * min(args.verbose, 2)
        logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SequenceBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


def main() -> None:
    sys.exit(run())
