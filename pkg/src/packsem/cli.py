"""Command-line front end: ``packsem parse|pack|enumerate|check|bench``.

Exit codes: 0 success, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from .forest import (
    ForestFormatError, forest_from_json, forest_to_dot, forest_to_json, node_counts,
    readings_count, validate,
)
from .packer import PackFailure, check_invariants, dump_packed, pack, sem_to_dot
from .parser import GrammarError, NoParse, UnknownToken, parse, pp_sentence
from .semgrammar import MissingTemplate, SemGrammar, pp_attachment_slots, resolve_grammar
from .term import format_term
from .unfolder import (
    GrammarFailure, OracleBoundExceeded, enumerate_solutions, equiv_check, oracle_bound,
    oracle_per_tree, query_bindings, solutions_json, solutions_text,
)

CSV_HEADER = ("n", "readings", "and_or_nodes", "pack_ms", "enum_ms")


class InputError(Exception):
    pass


@dataclass
class BenchRow:
    n: int
    readings: int
    and_or_nodes: int
    pack_ms: float
    enum_ms: Optional[float] = None

    def csv_fields(self):
        return [self.n, self.readings, self.and_or_nodes, f"{self.pack_ms:.2f}",
                "" if self.enum_ms is None else f"{self.enum_ms:.2f}"]


def _grammar(source: str) -> SemGrammar:
    try:
        return resolve_grammar(source)
    except OSError as e:
        raise InputError(f"cannot read grammar {source}: {e.strerror or e}") from None
    except GrammarError as e:
        raise InputError(str(e)) from None


def _tokens(args) -> List[str]:
    if args.pp is not None:
        return pp_sentence(args.pp)
    if args.sentence is not None:
        return args.sentence.split()
    raise InputError("give a sentence with -s or a PP count with --pp")


def _load_forest(path: str, g: SemGrammar):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        f = forest_from_json(text)
    except OSError as e:
        raise InputError(f"cannot read forest {path}: {e.strerror or e}") from None
    except (ForestFormatError, ValueError) as e:
        raise InputError(f"{path}: malformed forest: {e}") from None
    problems = validate(f, g.backbone)
    if problems:
        raise InputError(f"{path}: invalid forest\n" + "\n".join(f"  {v}" for v in problems))
    return f


def _write(text: str, out: Optional[str]):
    if out and out != "-":
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_parse(args) -> int:
    g = _grammar(args.grammar)
    f = parse(_tokens(args), g.backbone)
    problems = validate(f, g.backbone)
    if problems:
        print("parser produced an invalid forest:", *problems, sep="\n  ", file=sys.stderr)
        return 1
    text = forest_to_dot(f) if args.format == "dot" else json.dumps(forest_to_json(f)) + "\n"
    _write(text, args.output)
    a, o, l = node_counts(f)
    print(f"{readings_count(f)} readings, {a} AND + {o} OR nodes, {l} leaves", file=sys.stderr)
    return 0


def cmd_pack(args) -> int:
    g = _grammar(args.grammar)
    f = _load_forest(args.forest, g)
    p = pack(f, g, nary=args.nary == "on")
    _write(sem_to_dot(p) if args.dump == "dot" else dump_packed(p), args.output)
    return 0


def cmd_enumerate(args) -> int:
    g = _grammar(args.grammar)
    f = _load_forest(args.forest, g)
    p = pack(f, g)
    if args.slots:
        slots = pp_attachment_slots(p.sem_root.term)
        vs = [x for s in slots for x in s if x is not None]
        rows = query_bindings(p, vs, cap=args.cap)
        names = " ".join(f"({format_term(a)},{format_term(r)})" for a, r in slots)
        lines = [f"% attachment slots {names}"]
        lines += [", ".join(format_term(t) for t in row) for row in rows]
        _write("\n".join(lines) + "\n", args.output)
        return 0
    sols = list(enumerate_solutions(p, cap=args.cap))
    _write(solutions_json(sols) + "\n" if args.format == "json" else solutions_text(sols),
           args.output)
    print(f"{len(sols)} solutions", file=sys.stderr)
    return 0


def cmd_check(args) -> int:
    g = _grammar(args.grammar)
    bound = oracle_bound()
    top = readings_count(parse(pp_sentence(args.pp_max), g.backbone))
    if top > bound:
        raise InputError(
            f"--pp-max {args.pp_max} gives {top} readings, above the oracle bound {bound}; "
            "lower --pp-max or set PACKSEM_ORACLE_BOUND")
    failed = False
    total = 0
    for n in range(args.pp_max + 1):
        f = parse(pp_sentence(n), g.backbone)
        problems = validate(f, g.backbone)
        try:
            p = pack(f, g, nary=args.nary == "on")
            oracle = oracle_per_tree(f, g, bound=bound)
            eq = equiv_check(p, oracle)
            inv = check_invariants(p, f, g, bound=args.invariant_bound)
        except (PackFailure, GrammarFailure) as e:
            print(f"n={n}: FAIL {e}")
            failed = True
            continue
        total += len(oracle)
        ok = eq.equal and inv.ok and not problems
        failed |= not ok
        print(f"n={n}: {'ok' if ok else 'FAIL'}  readings={readings_count(f)} "
              f"oracle forms={len(oracle)} packed forms={eq.packed_count} "
              f"invariant nodes={inv.checked_nodes}")
        for v in problems:
            print(f"  forest: {v}")
        if not eq.equal:
            print("  " + str(eq).replace("\n", "\n  "))
        if not inv.ok:
            print("  " + str(inv).replace("\n", "\n  "))
    print(f"{'FAILED' if failed else 'all checks passed'}; {total} oracle forms compared")
    return 1 if failed else 0


def bench_rows(g: SemGrammar, ns: Sequence[int], nary: bool = True, repeat: int = 1,
               enum_limit: int = 0) -> List[BenchRow]:
    """Time ``pack`` (parsing excluded) for each PP count; enumerate too when
    the reading count is at most ``enum_limit``."""
    rows = []
    for n in ns:
        f = parse(pp_sentence(n), g.backbone)
        best = float("inf")
        for _ in range(max(1, repeat)):
            t0 = time.perf_counter()
            p = pack(f, g, nary=nary)
            best = min(best, time.perf_counter() - t0)
        r = readings_count(f)
        enum_ms = None
        if r <= enum_limit:
            t0 = time.perf_counter()
            for _ in enumerate_solutions(p):
                pass
            enum_ms = (time.perf_counter() - t0) * 1000
        # lexical leaves are preterminal AND nodes in the forest-size count
        rows.append(BenchRow(n, r, sum(node_counts(f)), best * 1000, enum_ms))
    return rows


def growth_summary(rows: Sequence[BenchRow]) -> str:
    lines = ["growth between consecutive rows (readings x, nodes x, pack time x):"]
    for a, b in zip(rows, rows[1:]):
        t = b.pack_ms / a.pack_ms if a.pack_ms > 0 else float("inf")
        lines.append(f"  n {a.n:>2} -> {b.n:>2}: readings x{b.readings / a.readings:,.1f}, "
                     f"nodes x{b.and_or_nodes / a.and_or_nodes:.2f}, time x{t:.2f}")
    by_n = {r.n: r for r in rows}
    last = rows[-1] if rows else None
    if last and last.n % 2 == 0 and last.n // 2 in by_n and last.n > 0:
        half = by_n[last.n // 2]
        lines.append(f"  doubling n {half.n} -> {last.n}: readings x{last.readings / half.readings:,.0f}, "
                     f"pack time x{last.pack_ms / half.pack_ms:.1f}")
    return "\n".join(lines)


def cmd_bench(args) -> int:
    g = _grammar(args.grammar)
    ns = list(range(args.pp_min, args.pp_max + 1, args.step))
    rows = bench_rows(g, ns, nary=args.nary == "on", repeat=args.repeat,
                      enum_limit=args.enum_limit)
    print(f"{'n':>3} {'readings':>12} {'nodes':>6} {'pack ms':>9} {'enum ms':>9}")
    for r in rows:
        e = "-" if r.enum_ms is None else f"{r.enum_ms:.1f}"
        print(f"{r.n:>3} {r.readings:>12} {r.and_or_nodes:>6} {r.pack_ms:>9.1f} {e:>9}")
    print(growth_summary(rows))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow(r.csv_fields())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="packsem", description="Packed semantics construction over parse forests.")
    sub = ap.add_subparsers(dest="command", required=True)

    def grammar_arg(p):
        p.add_argument("-g", "--grammar", default="demo",
                       help="grammar file, or a bundled grammar name (demo, demo-np)")

    p = sub.add_parser("parse", help="parse a sentence into a forest")
    grammar_arg(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("-s", "--sentence")
    src.add_argument("--pp", type=int, metavar="N", help='"i saw a man" plus N x "on a hill"')
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("pack", help="pack the semantics of a forest file")
    p.add_argument("forest", help="forest JSON file, or - for stdin")
    grammar_arg(p)
    p.add_argument("--dump", choices=("text", "dot"), default="text")
    p.add_argument("--nary", choices=("on", "off"), default="on")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("enumerate", help="list the readings of a packed forest")
    p.add_argument("forest")
    grammar_arg(p)
    p.add_argument("--cap", type=int)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--slots", action="store_true",
                   help="print only the PP attachment (label, referent) tuples")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("check", help="compare packing with the per-tree oracle")
    grammar_arg(p)
    p.add_argument("--pp-max", type=int, default=4)
    p.add_argument("--nary", choices=("on", "off"), default="on")
    p.add_argument("--invariant-bound", type=int, default=100,
                   help="check per-node invariants where a node has at most this many readings")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="time packing on PP-attachment sentences")
    grammar_arg(p)
    p.add_argument("--pp-min", type=int, default=2)
    p.add_argument("--pp-max", type=int, default=16)
    p.add_argument("--step", type=int, default=2)
    p.add_argument("--nary", choices=("on", "off"), default="on")
    p.add_argument("--repeat", type=int, default=1, help="report the best of this many runs")
    p.add_argument("--enum-limit", type=int, default=0,
                   help="also time enumeration when readings are at most this")
    p.add_argument("--csv", metavar="FILE")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, NoParse, UnknownToken, MissingTemplate, OracleBoundExceeded) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"packsem: {msg}", file=sys.stderr)
        return 2
    except PackFailure as e:
        print(f"packsem: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
