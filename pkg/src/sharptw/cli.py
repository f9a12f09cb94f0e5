"""Command-line front end: DIMACS in, exact model count out.

Exit statuses::

    0  success
    1  input or decomposition file could not be read
    2  DIMACS parse error (also argparse usage errors)
    3  imported decomposition is malformed or invalid
    4  --verify found a mismatch with brute force
    5  --verify refused: too many variables for brute force
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass

from . import oracle
from .counter import count_models, incidence_for, iter_tables, root_count
from .decompose import (Strategy, TdFormatError, TreeDecomposition, heuristic_decompose,
                        parse_td, validate, width, write_td)
from .formula import DimacsError, Formula, parse_dimacs
from .incidence import build_incidence
from .nicety import NiceDecomposition, make_nice

log = logging.getLogger("sharptw")

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_BAD_TD = 3
EXIT_MISMATCH = 4
EXIT_TOO_LARGE = 5


@dataclass
class RunConfig:
    input: str = "-"
    heuristic: Strategy = Strategy.MIN_FILL
    td_path: str | None = None
    strict: bool = False
    verify: bool = False
    stats: bool = False
    trace: bool = False
    emit_td: str | None = None
    dump_nice: str | None = None


class RunError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise RunError(f"cannot read {path}: {e.strerror}", EXIT_IO) from None


def decomposition_for(formula: Formula, config: RunConfig) -> TreeDecomposition:
    if config.td_path is None:
        return heuristic_decompose(build_incidence(formula, strict=config.strict),
                                   config.heuristic)
    text = _read(config.td_path)
    try:
        td = parse_td(text, formula.num_vars, len(formula.clauses))
    except TdFormatError as e:
        raise RunError(f"{config.td_path}: {e}", EXIT_BAD_TD) from None
    report = validate(incidence_for(formula, td), td)
    if not report:
        raise RunError(f"{config.td_path}: invalid decomposition: {report.describe()}",
                       EXIT_BAD_TD)
    return td


def _trace_line(nice: NiceDecomposition, t: int, table) -> str:
    node = nice.nodes[t]
    rows = [{"alpha": {str(x): b for x, b in alpha.items()},
             "unsat": sorted(unsat), "count": n}
            for alpha, unsat, n in table.rows()]
    return json.dumps({"node": t, "kind": node.kind.value,
                       "bag": [str(v) for v in sorted(node.bag)], "rows": rows})


def run(config: RunConfig, out=None, err=None) -> int:
    """Run the whole pipeline; returns the exit status."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        return _run(config, out, err)
    except RunError as e:
        print(f"sharptw: {e}", file=err)
        return e.status


def _run(config: RunConfig, out, err) -> int:
    text = _read(config.input)
    try:
        formula = parse_dimacs(text)
    except DimacsError as e:
        raise RunError(f"{config.input}: {e}", EXIT_PARSE) from None

    start = time.perf_counter()
    td = decomposition_for(formula, config)
    if config.emit_td:
        with open(config.emit_td, "w") as fh:
            fh.write(write_td(td, formula.num_vars, len(formula.clauses)))
    nice = make_nice(td)
    if config.dump_nice:
        with open(config.dump_nice, "w") as fh:
            json.dump(nice.to_dict(), fh, indent=1)

    if config.trace:
        root_table = None
        for t, table in iter_tables(formula, nice):
            print(_trace_line(nice, t, table), file=err)
            root_table = table
        count = root_count(formula, nice, root_table, strict=config.strict)
    else:
        count = count_models(formula, nice, strict=config.strict, check=False)
    elapsed = time.perf_counter() - start

    if config.verify:
        try:
            expected = oracle.brute_force_count(formula, strict=config.strict)
        except oracle.TooLarge as e:
            raise RunError(f"--verify: {e}", EXIT_TOO_LARGE) from None
        if expected != count:
            raise RunError(f"--verify: DP count {count} != brute force {expected}",
                           EXIT_MISMATCH)
        log.info("verified against brute force")

    print(count, file=out)
    if config.stats:
        bag_max = max(len(n.bag) for n in nice.nodes.values())
        stats = {
            "width": nice.width(),
            "input_width": width(td),
            "nodes": len(nice),
            "max_clause_size": formula.max_clause_size,
            "max_table_rows": 1 << bag_max,
            "variables": formula.num_vars,
            "clauses": len(formula.clauses),
            "wall_time": elapsed,
            "decomposition": config.td_path or config.heuristic.value,
        }
        print(json.dumps(stats), file=err)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharptw",
        description="Exact model counting over a tree-decomposition of the "
                    "incidence graph.")
    parser.add_argument("input", nargs="?", default="-",
                        help="DIMACS CNF file (default: standard input)")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--heuristic", choices=[s.value for s in Strategy],
                        default=Strategy.MIN_FILL.value,
                        help="elimination heuristic (default: min-fill)")
    source.add_argument("--td", metavar="FILE",
                        help="use this PACE .td decomposition instead of a heuristic")
    parser.add_argument("--emit-td", metavar="FILE",
                        help="write the decomposition used as PACE .td")
    parser.add_argument("--dump-nice", metavar="FILE",
                        help="write the nice decomposition as JSON")
    parser.add_argument("--strict-vars", action="store_true",
                        help="count over the variables that occur, not all declared ones")
    parser.add_argument("--verify", action="store_true",
                        help="cross-check against brute-force enumeration")
    parser.add_argument("--stats", action="store_true",
                        help="print run statistics as JSON on stderr")
    parser.add_argument("--trace", action="store_true",
                        help="print every node's nonzero table rows as JSON lines on stderr")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    config = RunConfig(
        input=args.input, heuristic=Strategy(args.heuristic), td_path=args.td,
        strict=args.strict_vars, verify=args.verify, stats=args.stats,
        trace=args.trace, emit_td=args.emit_td, dump_nice=args.dump_nice)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
