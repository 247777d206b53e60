"""Command-line driver: ``persistent-phylo solve|oracle|gen|check|bench|gcc-import``.

Exit codes: 0 Solution / Yes / valid, 10 NoSolution / No / invalid,
11 Timeout, 12 TooLarge, 2 bad input.
"""
from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .generator import InvalidParams, Unsatisfied, conflict_count, gen_matrix, gen_with_conflicts
from .graphs import build_conflict_graph
from .io import (
    ParseError,
    format_constraints,
    format_matrix,
    gcc_import,
    read_constraints,
    read_matrix,
)
from .matrix import BinaryMatrix, ConstraintSet, build_extended, forbidden_pair_witness, preprocess
from .oracle import DEFAULT_CAP, OracleVerdict, oracle_decide
from .poly import solve_empty_conflict
from .redblack import apply_reduction, build_red_black
from .search import STATS_HEADER, Budget, SolveOutcome, Verdict, decide_pp_opt, default_timeout, stats_row
from .tree import (
    NewickError,
    PPPTree,
    build_tree,
    dfs_reduction,
    format_trace,
    parse_newick,
    restore_tree,
    to_newick,
    validate_tree,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO = 10
EXIT_TIMEOUT = 11
EXIT_TOO_LARGE = 12

VERDICT_EXIT = {Verdict.SOLUTION: EXIT_OK, Verdict.NO_SOLUTION: EXIT_NO, Verdict.TIMEOUT: EXIT_TIMEOUT}
ORACLE_EXIT = {OracleVerdict.YES: EXIT_OK, OracleVerdict.NO: EXIT_NO, OracleVerdict.TOO_LARGE: EXIT_TOO_LARGE}

BENCH_AGGREGATE_HEADER = (
    "size,instances,no_solution,timeouts,solved,total_conflicts,"
    "average_conflicts,total_time_ms,average_time_ms"
)


class InputError(Exception):
    pass


@dataclass
class Solved:
    outcome: SolveOutcome
    tree: PPPTree | None  # on the original species and characters
    constraints: int
    n: int
    m: int


def solve_instance(
    m: BinaryMatrix,
    e: ConstraintSet | None = None,
    timeout: float | None = None,
    poly_only: bool = False,
) -> Solved:
    """Preprocess, solve, and map the tree back onto the input matrix."""
    e = e or ConstraintSet()
    pm, pe, report = preprocess(m, e)
    if poly_only:
        if not build_conflict_graph(pm).is_empty():
            raise InputError("--poly-only needs an instance whose conflict graph is empty")
        start = time.perf_counter()
        r = solve_empty_conflict(pm, pe)
        outcome = SolveOutcome(Verdict.NO_SOLUTION if r is None else Verdict.SOLUTION, r)
        if r is not None:
            g = build_red_black(build_extended(pm, pe))
            if not apply_reduction(g, r):
                raise AssertionError("polynomial reduction left edges")
            outcome.completion = g.extended.closed()
            if forbidden_pair_witness(outcome.completion) is not None:
                raise AssertionError("polynomial completion has a forbidden pair")
            outcome.tree = build_tree(outcome.completion)
        outcome.elapsed = time.perf_counter() - start
    else:
        outcome = decide_pp_opt(pm, pe, Budget(timeout=timeout))
    outcome.conflicts = conflict_count(m)
    tree = None
    if outcome.solved:
        tree = restore_tree(outcome.tree, report, m)
        check = validate_tree(tree, m, e)
        if not check.ok:
            raise AssertionError(f"restored tree does not validate: {check}")
    return Solved(outcome, tree, len(e), m.n_species, m.n_characters)


def _load(matrix_path: str, constraints_path: str | None) -> tuple[BinaryMatrix, ConstraintSet]:
    try:
        m = read_matrix(matrix_path)
        e = read_constraints(constraints_path, m) if constraints_path else ConstraintSet()
    except (ParseError, OSError) as err:
        raise InputError(str(err)) from None
    return m, e


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_solve(args) -> int:
    m, e = _load(args.matrix, args.constraints)
    res = solve_instance(m, e, args.timeout, args.poly_only)
    print(res.outcome.verdict.value)
    if res.tree is not None:
        newick = to_newick(res.tree) + "\n"
        trace = format_trace(dfs_reduction(res.tree), m.character_names)
        if args.newick:
            _write(args.newick, newick)
        else:
            sys.stdout.write(newick)
        if args.trace:
            _write(args.trace, trace)
    if args.stats:
        row = stats_row(Path(args.matrix).name, m, e, res.outcome)
        _write(args.stats, STATS_HEADER + "\n" + row + "\n")
    return VERDICT_EXIT[res.outcome.verdict]


def cmd_oracle(args) -> int:
    m, e = _load(args.matrix, args.constraints)
    cap = None if args.cap < 0 else args.cap
    result = oracle_decide(m, e, cap)
    print(result.verdict.value)
    return ORACLE_EXIT[result.verdict]


def _range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi if sep else lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo..hi, got {text!r}") from None
    if a < 0 or b < a:
        raise argparse.ArgumentTypeError(f"empty conflict range {text!r}")
    return range(a, b + 1)


def cmd_gen(args) -> int:
    try:
        if args.conflicts is None:
            m = gen_matrix(args.rows, args.cols, 0.5 if args.density is None else args.density, args.seed)
        else:
            m = gen_with_conflicts(args.rows, args.cols, args.conflicts, args.seed,
                                   args.max_attempts, args.density)
    except (InvalidParams, Unsatisfied) as err:
        raise InputError(str(err)) from None
    _write(args.out, format_matrix(m))
    print(conflict_count(m), file=sys.stderr if args.out == "-" else sys.stdout)
    return EXIT_OK


def cmd_check(args) -> int:
    paths = args.paths
    matrix_path, newick_path = paths[0], paths[-1]
    m, e = _load(matrix_path, paths[1] if len(paths) == 3 else None)
    try:
        tree = parse_newick(Path(newick_path).read_text(), m.species_names, m.character_names)
    except (NewickError, OSError) as err:
        raise InputError(f"{newick_path}: {err}") from None
    report = validate_tree(tree, m, e)
    print(report)
    return EXIT_OK if report.ok else EXIT_NO


def _bench_one(job: tuple[str, str | None, float | None]) -> tuple[str, str | None, tuple | None]:
    path, constraints, timeout = job
    name = Path(path).name
    try:
        m, e = _load(path, constraints)
        res = solve_instance(m, e, timeout)
    except InputError as err:
        return name, f"{err}", None
    out = res.outcome
    return name, None, (stats_row(name, m, e, out), f"{m.n_species}x{m.n_characters}",
                        out.verdict, out.conflicts, out.elapsed)


def bench_files(directory: str | Path) -> list[tuple[str, str | None]]:
    """Matrix files of ``directory`` in name order, each with its ``.constraints`` companion."""
    files = sorted(p for p in Path(directory).iterdir() if p.is_file() and p.suffix != ".constraints")
    out = []
    for p in files:
        comp = p.with_suffix(".constraints")
        out.append((str(p), str(comp) if comp.exists() else None))
    return out


def run_bench(directory: str | Path, timeout: float | None = None, jobs: int = 1, log=None) -> str:
    """Per-instance stats rows, then one aggregate row per matrix size."""
    tasks = [(p, c, timeout) for p, c in bench_files(directory)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_one, tasks))  # map keeps input order
    else:
        results = [_bench_one(t) for t in tasks]
    lines = [STATS_HEADER]
    groups: dict[str, list] = {}
    for name, error, data in results:
        if error is not None:
            print(f"error: {error}", file=log or sys.stderr)
            continue
        row, size, verdict, conflicts, elapsed = data
        lines.append(row)
        groups.setdefault(size, []).append((verdict, conflicts, elapsed))
    if groups:
        lines += ["# aggregate", BENCH_AGGREGATE_HEADER]
        for size, items in groups.items():
            k = len(items)
            total_c = sum(c for _, c, _ in items)
            total_t = sum(t for _, _, t in items)
            lines.append(",".join(str(v) for v in (
                size, k,
                sum(v is Verdict.NO_SOLUTION for v, _, _ in items),
                sum(v is Verdict.TIMEOUT for v, _, _ in items),
                sum(v is Verdict.SOLUTION for v, _, _ in items),
                total_c, f"{total_c / k:.2f}", int(round(total_t * 1000)), int(round(total_t * 1000 / k)),
            )))
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    if not Path(args.directory).is_dir():
        raise InputError(f"{args.directory}: not a directory")
    _write(args.out, run_bench(args.directory, args.timeout, args.jobs))
    return EXIT_OK


def cmd_gcc_import(args) -> int:
    try:
        m, e = gcc_import(args.gcc)
    except (ParseError, OSError) as err:
        raise InputError(str(err)) from None
    _write(args.matrix_out, format_matrix(m))
    if args.constraints_out:
        _write(args.constraints_out, format_constraints(e))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="persistent-phylo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decide an instance and emit its tree")
    s.add_argument("matrix")
    s.add_argument("constraints", nargs="?")
    s.add_argument("--timeout", type=float, default=None,
                   help=f"seconds (default {default_timeout():g}, or $PERSISTENT_PHYLO_TIMEOUT)")
    s.add_argument("--newick", metavar="PATH")
    s.add_argument("--trace", metavar="PATH")
    s.add_argument("--stats", metavar="PATH")
    s.add_argument("--poly-only", action="store_true")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="brute-force decision")
    o.add_argument("matrix")
    o.add_argument("constraints", nargs="?")
    o.add_argument("--cap", type=int, default=DEFAULT_CAP, help="open-pair limit; negative for none")
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen", help="generate a random matrix")
    g.add_argument("--rows", type=int, required=True)
    g.add_argument("--cols", type=int, required=True)
    g.add_argument("--density", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--conflicts", type=_range, default=None, metavar="LO..HI")
    g.add_argument("--max-attempts", type=int, default=10_000)
    g.add_argument("out", nargs="?", default="-")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="validate a Newick tree: MATRIX [CONSTRAINTS] NEWICK")
    c.add_argument("paths", nargs="+")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="solve every matrix in a directory")
    b.add_argument("directory")
    b.add_argument("--timeout", type=float, default=None)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", default="-")
    b.set_defaults(func=cmd_bench)

    i = sub.add_parser("gcc-import", help="convert a generalized-character instance")
    i.add_argument("gcc")
    i.add_argument("matrix_out")
    i.add_argument("constraints_out", nargs="?")
    i.set_defaults(func=cmd_gcc_import)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "check" and len(args.paths) not in (2, 3):
        parser.error("check takes MATRIX [CONSTRAINTS] NEWICK")
    try:
        return args.func(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
