"""Command-line interface: feasibility checks, decomposition, limits,
raw scaling and a naive-vs-accelerated benchmark.

Problems are read from a JSON document (matrix / row_sums / col_sums) or a
bordered CSV whose first row holds column targets and first column holds
row targets, with cell (0,0) empty. Reports go to standard output as JSON
(deterministic field order); row and column indices in reports are 1-based
to match the bordered display.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction

from .core import ParseError, Problem, ProblemError, validate_problem
from .decompose import decompose, limit_pair
from .feasibility import hall_check
from .scaling import isp_run


def parse_problem(source) -> Problem:
    """Read a problem from a path, '-' (stdin), or a file-like object."""
    if hasattr(source, "read"):
        text = source.read()
    elif source == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc}") from exc
    stripped = text.lstrip()
    if not stripped:
        raise ParseError("empty input")
    if stripped.startswith("{"):
        return _parse_json(text)
    return _parse_bordered_csv(text)


def _parse_json(text: str) -> Problem:
    try:
        # parse_float keeps decimal text exact instead of a float round-trip
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    for key in ("matrix", "row_sums", "col_sums"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    return validate_problem(doc["matrix"], doc["row_sums"], doc["col_sums"])


def _parse_bordered_csv(text: str) -> Problem:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise ParseError("bordered CSV needs a header row and one data row")
    header = rows[0]
    if header[0].strip():
        raise ParseError("cell (0,0) of a bordered CSV must be empty", 1, 1)
    col_sums = [cell.strip() for cell in header[1:] if cell.strip()]
    matrix = []
    row_sums = []
    for lineno, row in enumerate(rows[1:], start=2):
        cells = [cell.strip() for cell in row]
        if len(cells) != len(col_sums) + 1:
            raise ParseError(
                f"expected {len(col_sums) + 1} cells, got {len(cells)}", lineno)
        row_sums.append(cells[0])
        matrix.append(cells[1:])
    return validate_problem(matrix, row_sums, col_sums)


# --------------------------------------------------------------------------
# Report helpers
# --------------------------------------------------------------------------

def _frac(q: Fraction) -> dict:
    return {"fraction": str(q), "decimal": float(q)}


def _sig(value: float, precision: int) -> float:
    return float(f"%.{precision}g" % value)


def _matrix_out(M, precision: int | None):
    if precision is None:
        return [[float(v) for v in row] for row in M]
    return [[_sig(float(v), precision) for v in row] for row in M]


def _block_out(block, group: int) -> dict:
    return {
        "rows": [i + 1 for i in block.rows],
        "cols": [j + 1 for j in block.cols],
        "quotient": _frac(block.quotient),
        "group": group,
    }


def cmd_check(problem: Problem, scale=None) -> dict:
    r, c = problem.row_targets, problem.col_targets
    t = Fraction(scale) if scale is not None else \
        sum(r, Fraction(0)) / sum(c, Fraction(0))
    cert = hall_check(problem.support(), r, c, t)
    return {
        "command": "check",
        "scale": _frac(t),
        "verdict": "feasible" if cert.feasible else "infeasible",
        "witness_rows": sorted(i + 1 for i in cert.witness),
        "gap": _frac(cert.gap),
    }


def cmd_decompose(problem: Problem) -> dict:
    d = decompose(problem)
    return {
        "command": "decompose",
        "single_block": len(d.blocks) == 1,
        "blocks": [_block_out(b, g) for b, g in zip(d.blocks, d.peel_order)],
    }


def cmd_limits(problem: Problem, tol: float = 1e-10,
               precision: int | None = None) -> dict:
    t0 = time.perf_counter()
    lp = limit_pair(problem, tol=tol)
    elapsed = time.perf_counter() - t0
    r = problem.float_row_targets()
    c = problem.float_col_targets()
    row_res = float(abs(lp.B.sum(axis=1) / r - 1.0).max())
    col_res = float(abs(lp.C.sum(axis=0) / c - 1.0).max())
    return {
        "command": "limits",
        "blocks": [_block_out(b, g) for b, g in
                   zip(lp.decomposition.blocks, lp.decomposition.peel_order)],
        "B": _matrix_out(lp.B, precision),
        "C": _matrix_out(lp.C, precision),
        "row_sum_residual": row_res,
        "col_sum_residual": col_res,
        "per_block_iters": list(lp.per_block_iters),
        "timings": {"limits_seconds": round(elapsed, 6)},
    }


def cmd_scale(problem: Problem, iters: int = 1000, tol: float = 1e-12,
              trace_path=None, precision: int | None = None) -> dict:
    t0 = time.perf_counter()
    trace = isp_run(problem, max_iters=iters, tol=tol, stride=max(1, iters))
    elapsed = time.perf_counter() - t0
    final = trace.final
    if trace_path:
        _write_scale_trace(problem, iters, tol, trace_path)
    return {
        "command": "scale",
        "iterations": trace.iterations,
        "converged": trace.converged,
        "final_delta": trace.delta[-1],
        "final_col_deviation": trace.col_deviation[-1],
        "B": _matrix_out(final.B, precision),
        "C": _matrix_out(final.C, precision),
        "timings": {"scale_seconds": round(elapsed, 6)},
    }


def _write_scale_trace(problem: Problem, iters: int, tol: float, path) -> None:
    trace = isp_run(problem, max_iters=iters, tol=tol, stride=1)
    m, n = problem.num_rows, problem.num_cols
    entry_cols = [f"b_{i + 1}_{j + 1}" for i in range(m) for j in range(n)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "delta", "col_deviation"] + entry_cols)
        for entry, delta, dev in zip(trace.iterates, trace.delta,
                                     trace.col_deviation):
            writer.writerow([entry.k, repr(delta), repr(dev)]
                            + [repr(float(v)) for v in entry.B.flat])


def cmd_bench(problem: Problem, tol: float = 1e-6, cap: int = 10 ** 5,
              trace_path=None) -> dict:
    t0 = time.perf_counter()
    naive = isp_run(problem, max_iters=cap, tol=tol, stop_metric="col_dev")
    naive_seconds = time.perf_counter() - t0
    t0 = time.perf_counter()
    lp = limit_pair(problem, tol=tol)
    accel_seconds = time.perf_counter() - t0
    accel_iters = max(lp.per_block_iters)
    if trace_path:
        with open(trace_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "naive_col_deviation"])
            for k, dev in enumerate(naive.col_deviation, start=1):
                writer.writerow([k, repr(dev)])
    return {
        "command": "bench",
        "tol": tol,
        "naive_iterations": naive.iterations,
        "naive_converged": naive.converged,
        "accelerated_iterations": accel_iters,
        "blocks": len(lp.decomposition.blocks),
        "timings": {
            "naive_seconds": round(naive_seconds, 6),
            "accelerated_seconds": round(accel_seconds, 6),
        },
    }


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------

def _decompose_text(report: dict, precision: int) -> str:
    lines = []
    for blk in report["blocks"]:
        rows = ",".join(map(str, blk["rows"]))
        cols = ",".join(map(str, blk["cols"]))
        q = blk["quotient"]
        lines.append(f"block rows={{{rows}}} cols={{{cols}}} "
                     f"quotient={q['fraction']} "
                     f"({_sig(q['decimal'], precision)}) group={blk['group']}")
    lines.append("single block" if report["single_block"]
                 else f"{len(report['blocks'])} blocks")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isplimits",
        description="Iterative scaling limits and block decomposition.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", help="problem file (JSON or bordered CSV), or - for stdin")
        p.add_argument("--precision", type=int, default=6,
                       help="significant digits in text/matrix output")
        return p

    p = add("check", "generalized Hall feasibility at a scale factor")
    p.add_argument("--scale", default=None,
                   help="scale factor t (fraction or decimal); default sum(r)/sum(c)")

    p = add("decompose", "limit block decomposition")
    p.add_argument("--format", choices=["json", "text"], default="json")

    p = add("limits", "both scaling limits via per-block scaling")
    p.add_argument("--tol", type=float, default=1e-10)

    p = add("scale", "raw iterative scaling")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--trace", default=None, help="per-iteration CSV output path")

    p = add("bench", "naive vs decomposition-accelerated convergence")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--iters", type=int, default=10 ** 5,
                   help="iteration cap for the naive run")
    p.add_argument("--trace", default=None, help="naive deviation CSV path")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem = parse_problem(args.input)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "check":
            report = cmd_check(problem, args.scale)
        elif args.command == "decompose":
            report = cmd_decompose(problem)
            if args.format == "text":
                print(_decompose_text(report, args.precision))
                return 0
        elif args.command == "limits":
            report = cmd_limits(problem, tol=args.tol, precision=None)
        elif args.command == "scale":
            report = cmd_scale(problem, iters=args.iters, tol=args.tol,
                               trace_path=args.trace, precision=None)
        else:
            report = cmd_bench(problem, tol=args.tol, cap=args.iters,
                               trace_path=args.trace)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1

    print(json.dumps(report, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
