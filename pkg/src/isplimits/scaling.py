"""The iterative scaling loop: row/column adjustment and iterate traces.

One iteration index k covers a full round: a row adjustment producing B(k)
followed by a column adjustment producing C(k). The loop runs in floating
point by default; an opt-in exact-rational mode exists for small fixtures
where closed-form iterate values are checked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    Problem,
    SupportMismatchError,
    ZeroColSumError,
    ZeroRowSumError,
)


@dataclass(frozen=True)
class AdjustResult:
    """Adjusted matrix plus the per-line multipliers that produced it."""

    matrix: object      # np.ndarray, or tuple grid of Fraction in exact mode
    multipliers: object


@dataclass(frozen=True)
class TraceEntry:
    k: int
    B: object
    C: object
    x: object  # row multipliers of the round
    y: object  # column multipliers of the round


@dataclass
class ScalingTrace:
    """Retained iterates plus per-round convergence metrics.

    delta[k-1] is the sup-norm change of B at round k (B(0) taken as the
    initial matrix); col_deviation[k-1] is the max relative deviation of
    B(k) column sums from the column targets.
    """

    iterates: list = field(default_factory=list)
    delta: list = field(default_factory=list)
    col_deviation: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @property
    def final(self) -> TraceEntry:
        return self.iterates[-1]


def _exact_grid(M) -> bool:
    return not isinstance(M, np.ndarray)


def row_adjust(M, r) -> AdjustResult:
    """Rescale each row to its target sum; multiplier x_i = r_i / row sum."""
    if _exact_grid(M):
        rows = []
        mult = []
        for i, row in enumerate(M):
            s = sum(row, Fraction(0))
            if s == 0:
                raise ZeroRowSumError(i)
            x = Fraction(r[i]) / s
            mult.append(x)
            rows.append(tuple(x * v for v in row))
        return AdjustResult(tuple(rows), tuple(mult))
    M = np.asarray(M, dtype=float)
    sums = M.sum(axis=1)
    zero = np.flatnonzero(sums == 0)
    if zero.size:
        raise ZeroRowSumError(int(zero[0]))
    x = np.asarray(r, dtype=float) / sums
    return AdjustResult(M * x[:, None], x)


def col_adjust(M, c) -> AdjustResult:
    """Rescale each column to its target sum; y_j = c_j / column sum."""
    if _exact_grid(M):
        n = len(M[0])
        sums = [sum((row[j] for row in M), Fraction(0)) for j in range(n)]
        mult = []
        for j, s in enumerate(sums):
            if s == 0:
                raise ZeroColSumError(j)
            mult.append(Fraction(c[j]) / s)
        out = tuple(tuple(v * mult[j] for j, v in enumerate(row)) for row in M)
        return AdjustResult(out, tuple(mult))
    M = np.asarray(M, dtype=float)
    sums = M.sum(axis=0)
    zero = np.flatnonzero(sums == 0)
    if zero.size:
        raise ZeroColSumError(int(zero[0]))
    y = np.asarray(c, dtype=float) / sums
    return AdjustResult(M * y[None, :], y)


def isp_run(problem: Problem, max_iters: int = 1000, tol: float = 1e-12,
            stride: int = 1, exact: bool = False,
            stop_metric: str = "delta") -> ScalingTrace:
    """Alternate row and column adjustment starting from the problem matrix.

    Stops when the chosen metric ("delta": sup-norm change of B per round,
    "col_dev": max relative column-sum deviation of B) drops to tol, or at
    max_iters rounds. Every stride-th round is retained in the trace, plus
    always the final one.
    """
    if exact:
        return _isp_run_exact(problem, max_iters, tol, stride, stop_metric)
    A = problem.float_matrix()
    r = problem.float_row_targets()
    c = problem.float_col_targets()
    trace = ScalingTrace()
    prev_B = A
    cur = A
    for k in range(1, max_iters + 1):
        ra = row_adjust(cur, r)
        B = ra.matrix
        ca = col_adjust(B, c)
        C = ca.matrix
        delta = float(np.abs(B - prev_B).max())
        col_dev = float(np.abs(B.sum(axis=0) / c - 1.0).max())
        trace.delta.append(delta)
        trace.col_deviation.append(col_dev)
        trace.iterations = k
        metric = delta if stop_metric == "delta" else col_dev
        done = metric <= tol or k == max_iters
        if k % stride == 0 or done:
            trace.iterates.append(TraceEntry(k, B, C, ra.multipliers,
                                             ca.multipliers))
        if metric <= tol:
            trace.converged = True
            break
        prev_B = B
        cur = C
    return trace


def _isp_run_exact(problem: Problem, max_iters: int, tol,
                   stride: int, stop_metric: str) -> ScalingTrace:
    r = problem.row_targets
    c = problem.col_targets
    trace = ScalingTrace()
    prev_B = problem.matrix
    cur = problem.matrix
    tol = Fraction(tol) if tol else Fraction(0)
    for k in range(1, max_iters + 1):
        ra = row_adjust(cur, r)
        B = ra.matrix
        ca = col_adjust(B, c)
        C = ca.matrix
        delta = max(abs(b - p) for rb, rp in zip(B, prev_B)
                    for b, p in zip(rb, rp))
        n = len(c)
        col_dev = max(abs(sum((row[j] for row in B), Fraction(0)) / c[j] - 1)
                      for j in range(n))
        trace.delta.append(delta)
        trace.col_deviation.append(col_dev)
        trace.iterations = k
        metric = delta if stop_metric == "delta" else col_dev
        done = metric <= tol or k == max_iters
        if k % stride == 0 or done:
            trace.iterates.append(TraceEntry(k, B, C, ra.multipliers,
                                             ca.multipliers))
        if metric <= tol:
            trace.converged = True
            break
        prev_B = B
        cur = C
    return trace


def check_diag_equivalent(M, M2, floor: float = 1e-9) -> bool:
    """Decide whether M = diag(x) @ M2 @ diag(y) for some positive x, y.

    Multipliers are propagated along a spanning forest of the bipartite
    support graph; every remaining support edge is then checked for
    consistency within relative tolerance floor.
    """
    M = np.asarray(M, dtype=float)
    M2 = np.asarray(M2, dtype=float)
    if M.shape != M2.shape:
        raise SupportMismatchError("shapes differ")
    if not np.array_equal(M != 0, M2 != 0):
        raise SupportMismatchError("supports differ")
    m, n = M.shape
    x = np.full(m, np.nan)
    y = np.full(n, np.nan)
    edges = list(zip(*np.nonzero(M)))
    adj_row = [[] for _ in range(m)]
    adj_col = [[] for _ in range(n)]
    for i, j in edges:
        adj_row[i].append(j)
        adj_col[j].append(i)
    for root in range(m):
        if not np.isnan(x[root]):
            continue
        x[root] = 1.0
        stack = [("r", root)]
        while stack:
            side, v = stack.pop()
            if side == "r":
                for j in adj_row[v]:
                    if np.isnan(y[j]):
                        y[j] = M[v, j] / (x[v] * M2[v, j])
                        stack.append(("c", j))
            else:
                for i in adj_col[v]:
                    if np.isnan(x[i]):
                        x[i] = M[i, v] / (M2[i, v] * y[v])
                        stack.append(("r", i))
    for i, j in edges:
        if abs(M[i, j] / (x[i] * M2[i, j] * y[j]) - 1.0) > floor:
            return False
    return True
