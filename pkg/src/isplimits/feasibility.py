"""Generalized Hall feasibility via exact max-flow on the support network.

Feasibility of row sums r and scaled column sums t*c over a support pattern
reduces to a transportation flow: source -> row i (capacity r_i), row -> col
over each support pair (surrogate-infinite capacity), col j -> sink
(capacity t*c_j). All capacities are exact rationals, so tightness
r(I) = t*c(N(I)) is decided without tolerances.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import networkx as nx

from .core import (
    InfeasibleInstanceError,
    SupportPattern,
    TotalsMismatchError,
    marginal_sum,
)

SOURCE = 0


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    capacity: Fraction


@dataclass(frozen=True)
class FlowNetwork:
    """Bipartite transportation network for one scale factor t."""

    num_rows: int
    num_cols: int
    t: Fraction
    arcs: tuple  # of Arc, deterministic row-major order

    @property
    def sink(self) -> int:
        return 1 + self.num_rows + self.num_cols

    def row_node(self, i: int) -> int:
        return 1 + i

    def col_node(self, j: int) -> int:
        return 1 + self.num_rows + j


@dataclass(frozen=True)
class MaxFlowResult:
    flow: tuple        # per-arc flow, aligned with network.arcs
    value: Fraction
    residual_reach_from_source: frozenset
    residual_reach_to_sink: frozenset


@dataclass(frozen=True)
class HallCertificate:
    feasible: bool
    witness: frozenset  # row set I
    gap: Fraction       # r(I) - t*c(N(I))


def build_network(support: SupportPattern, r, c, t) -> FlowNetwork:
    """Transportation network with column capacities scaled by t."""
    t = Fraction(t)
    if t <= 0:
        raise ValueError("scale factor t must be > 0")
    m, n = support.num_rows, support.num_cols
    total_r = marginal_sum(r, range(m))
    arcs = []
    for i in range(m):
        arcs.append(Arc(SOURCE, 1 + i, Fraction(r[i])))
    # Surrogate infinity: strictly exceeds any feasible flow, so support
    # arcs never saturate and no min cut contains one.
    for i, j in sorted(support.pairs):
        arcs.append(Arc(1 + i, 1 + m + j, total_r + 1))
    sink = 1 + m + n
    for j in range(n):
        arcs.append(Arc(1 + m + j, sink, t * Fraction(c[j])))
    return FlowNetwork(m, n, t, tuple(arcs))


def max_flow(net: FlowNetwork) -> MaxFlowResult:
    """Exact max flow by shortest augmenting paths (Edmonds-Karp)."""
    num_nodes = net.sink + 1
    # Paired directed edges: even index forward, odd its reverse.
    heads = []
    caps = []
    adj = [[] for _ in range(num_nodes)]
    for arc in net.arcs:
        adj[arc.tail].append(len(heads))
        heads.append(arc.head)
        caps.append(arc.capacity)
        adj[arc.head].append(len(heads))
        heads.append(arc.tail)
        caps.append(Fraction(0))
    flow = [Fraction(0)] * len(heads)

    def residual(e):
        return caps[e] - flow[e]

    value = Fraction(0)
    while True:
        parent_edge = [-1] * num_nodes
        parent_edge[SOURCE] = -2
        queue = deque([SOURCE])
        while queue:
            v = queue.popleft()
            if v == net.sink:
                break
            for e in adj[v]:
                w = heads[e]
                if parent_edge[w] == -1 and residual(e) > 0:
                    parent_edge[w] = e
                    queue.append(w)
        if parent_edge[net.sink] == -1:
            break
        # Trace the path back and augment by its bottleneck.
        path = []
        v = net.sink
        while v != SOURCE:
            e = parent_edge[v]
            path.append(e)
            v = heads[e ^ 1]
        push = min(residual(e) for e in path)
        for e in path:
            flow[e] += push
            flow[e ^ 1] -= push
        value += push

    from_source = _reach(adj, heads, residual, SOURCE, forward=True)
    to_sink = _reach(adj, heads, residual, net.sink, forward=False)
    per_arc = tuple(flow[2 * k] for k in range(len(net.arcs)))
    return MaxFlowResult(per_arc, value, frozenset(from_source),
                         frozenset(to_sink))


def _reach(adj, heads, residual, start, forward: bool):
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for e in adj[v]:
            # Backward reachability walks residual arcs against their
            # direction: w -> v has residual iff residual(e^1) > 0 for the
            # edge e leaving v toward w.
            ok = residual(e) > 0 if forward else residual(e ^ 1) > 0
            w = heads[e]
            if ok and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def max_gap_set(support: SupportPattern, r, c, t):
    """Maximal row set maximizing r(I) - t*c(N(I)), with the gap value.

    The optimizers form a lattice; the unique maximal one is the set of
    rows with no residual path to the sink after a max flow (source side
    of the sink-minimal min cut). The empty set is allowed, with gap 0.
    """
    net = build_network(support, r, c, t)
    result = max_flow(net)
    total_r = marginal_sum(r, range(support.num_rows))
    gap = total_r - result.value
    rows = frozenset(
        i for i in range(support.num_rows)
        if net.row_node(i) not in result.residual_reach_to_sink
    )
    return gap, rows


def hall_check(support: SupportPattern, r, c, t) -> HallCertificate:
    """Feasibility of marginals (r, t*c) over the support.

    Feasible iff no row set I has r(I) > t*c(N(I)); the witness is the
    maximal gap optimizer (the maximal tight set when feasible).
    """
    gap, rows = max_gap_set(support, r, c, t)
    return HallCertificate(gap == 0, rows, gap)


def flexible_support(support: SupportPattern, r, c, t) -> SupportPattern:
    """Support positions usable by some matrix with marginals (r, t*c).

    Requires a feasible instance with matching totals. An unused support
    arc (i, j) is flexible iff the residual graph carries a path from
    column j back to row i, i.e. rows and columns in one strongly
    connected component of the residual graph on interior nodes.
    """
    t = Fraction(t)
    m, n = support.num_rows, support.num_cols
    total_r = marginal_sum(r, range(m))
    if total_r != t * marginal_sum(c, range(n)):
        raise TotalsMismatchError(
            f"sum(r) = {total_r} but t*sum(c) = {t * marginal_sum(c, range(n))}")
    net = build_network(support, r, c, t)
    result = max_flow(net)
    if result.value != total_r:
        raise InfeasibleInstanceError(
            f"instance infeasible at scale {t}: flow {result.value} < {total_r}")
    arc_flow = dict(zip(net.arcs, result.flow))
    graph = nx.DiGraph()
    graph.add_nodes_from(("r", i) for i in range(m))
    graph.add_nodes_from(("c", j) for j in range(n))
    positive = set()
    for arc, f in arc_flow.items():
        if arc.tail == SOURCE or arc.head == net.sink:
            continue
        i, j = arc.tail - 1, arc.head - 1 - m
        graph.add_edge(("r", i), ("c", j))
        if f > 0:
            positive.add((i, j))
            graph.add_edge(("c", j), ("r", i))
    comp = {}
    for k, scc in enumerate(nx.strongly_connected_components(graph)):
        for node in scc:
            comp[node] = k
    pairs = frozenset(
        (i, j) for (i, j) in support.pairs
        if (i, j) in positive or comp[("r", i)] == comp[("c", j)]
    )
    return SupportPattern(m, n, pairs)
