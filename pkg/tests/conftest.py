"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately avoid the library's flow/decomposition code
paths: subset enumeration for feasibility and max-ratio questions, an LP
for flexible edges, and a plain float scaling loop (numba-compiled) for
limit behaviour.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from numba import njit

from isplimits.core import SupportPattern, marginal_sum, neighborhood, validate_problem


# --------------------------------------------------------------------------
# Fixtures: the worked 4x4 instance
# --------------------------------------------------------------------------

PAPER_MATRIX = [[1, 0, 0, 0],
                [1, 1, 0, 0],
                [1, 1, 7, 2],
                [1, 1, 9, 6]]
PAPER_R = [6, 6, 4, 1]
PAPER_C = [4, 4, 2, 1]

# Printed iterates after 500 full rounds (1000 half-steps).
PAPER_B500 = np.array([
    [6.0, 0.0, 0.0, 0.0],
    [0.171, 5.83, 0.0, 0.0],
    [0.00907, 0.309, 2.61, 1.08],
    [0.00132, 0.0447, 0.486, 0.468],
])
PAPER_C500 = np.array([
    [3.88, 0.0, 0.0, 0.0],
    [0.111, 3.77, 0.0, 0.0],
    [0.00587, 0.2, 1.69, 0.697],
    [0.000851, 0.0289, 0.314, 0.303],
])


@pytest.fixture
def paper_problem():
    return validate_problem(PAPER_MATRIX, PAPER_R, PAPER_C)


# --------------------------------------------------------------------------
# Random instances
# --------------------------------------------------------------------------

def random_instance(rng, max_m=6, max_n=6, max_target=20):
    """Random valid problem: random support, integer targets, unit entries."""
    m = rng.integers(1, max_m + 1)
    n = rng.integers(1, max_n + 1)
    while True:
        mask = rng.random((m, n)) < rng.uniform(0.3, 0.9)
        if mask.any(axis=1).all() and mask.any(axis=0).all():
            break
    entries = rng.integers(1, 10, size=(m, n)) * mask
    r = rng.integers(1, max_target + 1, size=m)
    c = rng.integers(1, max_target + 1, size=n)
    return validate_problem(entries.tolist(), r.tolist(), c.tolist())


def random_rational(rng, max_den=9):
    num = int(rng.integers(1, 30))
    den = int(rng.integers(1, max_den + 1))
    return Fraction(num, den)


# --------------------------------------------------------------------------
# Brute-force oracles
# --------------------------------------------------------------------------

def all_subsets(m):
    for size in range(m + 1):
        yield from (frozenset(s) for s in combinations(range(m), size))


def brute_max_gap(support: SupportPattern, r, c, t):
    """Max of r(I) - t*c(N(I)) over all row subsets, with the maximal
    optimizer (union of all optimizers)."""
    t = Fraction(t)
    best = None
    optimizers = []
    for I in all_subsets(support.num_rows):
        gap = marginal_sum(r, I) - t * marginal_sum(c, neighborhood(support, I))
        if best is None or gap > best:
            best = gap
            optimizers = [I]
        elif gap == best:
            optimizers.append(I)
    maximal = frozenset().union(*optimizers)
    assert marginal_sum(r, maximal) - t * marginal_sum(
        c, neighborhood(support, maximal)) == best, \
        "optimizer union is not itself an optimizer"
    return best, maximal, optimizers


def brute_phi(support: SupportPattern, r, c):
    """Max-ratio row set by enumeration; maximal cardinality on ties."""
    best_ratio = None
    argmax = []
    for I in all_subsets(support.num_rows):
        if not I:
            continue
        ratio = marginal_sum(r, I) / marginal_sum(c, neighborhood(support, I))
        if best_ratio is None or ratio > best_ratio:
            best_ratio = ratio
            argmax = [I]
        elif ratio == best_ratio:
            argmax.append(I)
    winners = [I for I in argmax if len(I) == max(len(J) for J in argmax)]
    assert len(winners) == 1, "maximal-cardinality ratio maximizer not unique"
    return best_ratio, winners[0], argmax


@njit(cache=True)
def naive_isp(A, r, c, iters):
    """Plain alternating scaling; returns (B(iters), C(iters))."""
    M = A.copy()
    B = A.copy()
    for _ in range(iters):
        for i in range(M.shape[0]):
            M[i] *= r[i] / M[i].sum()
        B = M.copy()
        for j in range(M.shape[1]):
            M[:, j] *= c[j] / M[:, j].sum()
    return B, M


def lp_flexible_support(support: SupportPattern, r, c, t):
    """Flexible edges by LP: maximize each edge subject to the marginals."""
    from scipy.optimize import linprog

    t = float(Fraction(t))
    edges = sorted(support.pairs)
    m, n = support.num_rows, support.num_cols
    A_eq = np.zeros((m + n, len(edges)))
    for k, (i, j) in enumerate(edges):
        A_eq[i, k] = 1.0
        A_eq[m + j, k] = 1.0
    b_eq = np.array([float(v) for v in r] + [t * float(v) for v in c])
    flexible = set()
    for k in range(len(edges)):
        cost = np.zeros(len(edges))
        cost[k] = -1.0
        res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=(0, None),
                      method="highs")
        assert res.status == 0, "LP oracle expected a feasible instance"
        if -res.fun > 1e-7:
            flexible.add(edges[k])
    return frozenset(flexible)
