"""Limit-point block decomposition and fast limit assembly.

The first block is the unique maximal-cardinality row set maximizing
r(I)/c(N(I)), found by Dinkelbach iteration over parametric max-gap
subproblems. Step I peels first blocks off the remainder; step II refines
each peeled block into the connected components of its flexible support.
The two scaling limits are then assembled by running the scaling loop
independently inside each block, where it converges fast.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import networkx as nx
import numpy as np

from .core import (
    Block,
    Decomposition,
    EmptyBlockSupportError,
    InfeasibleBlockError,
    Problem,
    Splitting,
    SupportPattern,
    marginal_sum,
    neighborhood,
    validate_problem,
)
from .feasibility import flexible_support, hall_check, max_gap_set
from .scaling import isp_run


@dataclass(frozen=True)
class PhiResult:
    """Maximal-ratio first block: rows I, cols N(I), ratio r(I)/c(N(I))."""

    rows: frozenset
    cols: frozenset
    ratio: Fraction
    dinkelbach_steps: int


@dataclass(frozen=True)
class LimitPair:
    """The two scaling limits with the decomposition that produced them."""

    B: np.ndarray
    C: np.ndarray
    decomposition: Decomposition
    per_block_iters: tuple


def phi(support: SupportPattern, r, c) -> PhiResult:
    """Row set maximizing r(I)/c(N(I)), maximal cardinality on ties.

    Dinkelbach iteration: start at the full-set ratio, solve the max-gap
    subproblem at the current parameter, and raise the parameter to the
    ratio of the optimizer while the gap stays positive. The parameter
    strictly increases, and only finitely many subset ratios exist.
    """
    m, n = support.num_rows, support.num_cols
    t = marginal_sum(r, range(m)) / marginal_sum(c, range(n))
    steps = 0
    while True:
        steps += 1
        gap, rows = max_gap_set(support, r, c, t)
        if gap > 0:
            t = marginal_sum(r, rows) / marginal_sum(c, neighborhood(support, rows))
        else:
            assert rows, "max-gap optimizer must be nonempty at the optimum"
            return PhiResult(rows, neighborhood(support, rows), t, steps)


def step_one(problem: Problem) -> Splitting:
    """Peel maximal-ratio blocks until rows and columns are exhausted.

    Blocks come out in peel order with strictly decreasing quotients; each
    intermediate remainder is again a valid instance (no empty lines, by
    maximality of the peeled set).
    """
    support = problem.support()
    r, c = problem.row_targets, problem.col_targets
    remaining_rows = list(range(problem.num_rows))
    remaining_cols = list(range(problem.num_cols))
    blocks = []
    while remaining_rows:
        sub = support.restrict(remaining_rows, remaining_cols)
        res = phi(sub, [r[i] for i in remaining_rows],
                  [c[j] for j in remaining_cols])
        rows = tuple(sorted(remaining_rows[i] for i in res.rows))
        cols = tuple(sorted(remaining_cols[j] for j in res.cols))
        if blocks and not res.ratio < blocks[-1].quotient:
            raise AssertionError("peel quotients failed to decrease strictly")
        blocks.append(Block(rows, cols, res.ratio))
        remaining_rows = [i for i in remaining_rows if i not in set(rows)]
        remaining_cols = [j for j in remaining_cols if j not in set(cols)]
    assert not remaining_cols, "columns left over after peeling all rows"
    return Splitting(tuple(blocks))


def step_two(problem: Problem, block: Block) -> list:
    """Refine one peeled block into the components of its flexible support.

    Inside the block, marginals (r, q*c) are feasible with total match, so
    the flexible edges are exactly the support of the limit there; its
    bipartite connected components are the final sub-blocks, each tight at
    the same quotient q.
    """
    support = problem.support()
    r, c = problem.row_targets, problem.col_targets
    sub = support.restrict(block.rows, block.cols)
    r_sub = [r[i] for i in block.rows]
    c_sub = [c[j] for j in block.cols]
    cert = hall_check(sub, r_sub, c_sub, block.quotient)
    if not cert.feasible:
        raise InfeasibleBlockError(
            f"block {block.rows}x{block.cols} infeasible at {block.quotient}")
    flex = flexible_support(sub, r_sub, c_sub, block.quotient)
    graph = nx.Graph()
    graph.add_nodes_from(("r", i) for i in range(len(block.rows)))
    graph.add_nodes_from(("c", j) for j in range(len(block.cols)))
    graph.add_edges_from((("r", i), ("c", j)) for (i, j) in flex.pairs)
    out = []
    for comp in nx.connected_components(graph):
        rows = tuple(sorted(block.rows[i] for s, i in comp if s == "r"))
        cols = tuple(sorted(block.cols[j] for s, j in comp if s == "c"))
        sub_block = Block(rows, cols, block.quotient)
        recomputed = marginal_sum(r, rows) / marginal_sum(c, cols)
        assert recomputed == block.quotient, \
            "flexible component not tight at the block quotient"
        out.append(sub_block)
    out.sort(key=lambda b: b.rows[0])
    return out


def decompose(problem: Problem) -> Decomposition:
    """Full block decomposition of the scaling limits: step I then step II."""
    splitting = step_one(problem)
    blocks = []
    peel_order = []
    for g, top in enumerate(splitting.blocks):
        for sub in step_two(problem, top):
            blocks.append(sub)
            peel_order.append(g)
    d = Decomposition(tuple(blocks), tuple(peel_order))
    d.check_partition(problem.num_rows, problem.num_cols)
    return d


def prune(problem: Problem, d: Splitting) -> Problem:
    """Zero every matrix entry outside the blocks; targets unchanged."""
    d.check_partition(problem.num_rows, problem.num_cols)
    keep = set()
    for b in d.blocks:
        keep |= {(i, j) for i in b.rows for j in b.cols}
    matrix = tuple(
        tuple(v if (i, j) in keep else Fraction(0)
              for j, v in enumerate(row))
        for i, row in enumerate(problem.matrix)
    )
    for b in d.blocks:
        for i in b.rows:
            if all(matrix[i][j] == 0 for j in b.cols):
                raise EmptyBlockSupportError(f"row {i} has no support in its block")
        for j in b.cols:
            if all(matrix[i][j] == 0 for i in b.rows):
                raise EmptyBlockSupportError(f"column {j} has no support in its block")
    return Problem(matrix, problem.row_targets, problem.col_targets)


def limit_pair(problem: Problem, tol: float = 1e-10,
               max_iters: int = 10 ** 6) -> LimitPair:
    """Both scaling limits, assembled block by block.

    Each block is scaled on its own with column targets q*c; inside a
    feasible block of maximal support the loop converges, and the
    column-correct limit is the row-correct one divided by q.
    """
    d = decompose(problem)
    pruned = prune(problem, d)
    m, n = problem.num_rows, problem.num_cols
    B = np.zeros((m, n))
    C = np.zeros((m, n))
    iters = []
    for block in d.blocks:
        rows, cols, q = block.rows, block.cols, block.quotient
        if len(rows) == 1 and len(cols) == 1:
            B[rows[0], cols[0]] = float(problem.row_targets[rows[0]])
            C[rows[0], cols[0]] = float(problem.col_targets[cols[0]])
            iters.append(0)
            continue
        sub_matrix = [[pruned.matrix[i][j] for j in cols] for i in rows]
        sub = validate_problem(sub_matrix,
                               [problem.row_targets[i] for i in rows],
                               [q * problem.col_targets[j] for j in cols])
        trace = isp_run(sub, max_iters=max_iters, tol=tol,
                        stride=max_iters, stop_metric="col_dev")
        iters.append(trace.iterations)
        sub_B = trace.final.B
        for a, i in enumerate(rows):
            for b, j in enumerate(cols):
                B[i, j] = sub_B[a, b]
                C[i, j] = sub_B[a, b] / float(q)
    return LimitPair(B, C, d, tuple(iters))
