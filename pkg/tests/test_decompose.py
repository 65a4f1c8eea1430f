from fractions import Fraction

import numpy as np
import pytest

from isplimits.core import Block, validate_problem
from isplimits.decompose import (
    decompose,
    limit_pair,
    phi,
    prune,
    step_one,
    step_two,
)
from isplimits.feasibility import hall_check

from conftest import brute_phi, naive_isp, random_instance


def problem(matrix, r, c):
    return validate_problem(matrix, r, c)


L_SHAPE = problem([[1, 0], [1, 1]], [3, 1], [1, 3])
TRIANGLE = problem([[1, 1], [0, 1]], [1, 1], [1, 1])


def blocks_as_sets(d):
    return {(b.rows, b.cols, b.quotient) for b in d.blocks}


def decomposition_from_limit(B, r, c, threshold=1e-4):
    """Block structure of a numeric limit: components of the bipartite
    graph on entries above the vanishing threshold."""
    import networkx as nx

    g = nx.Graph()
    m, n = B.shape
    g.add_nodes_from(("r", i) for i in range(m))
    g.add_nodes_from(("c", j) for j in range(n))
    for i in range(m):
        for j in range(n):
            if B[i, j] > threshold:
                g.add_edge(("r", i), ("c", j))
    out = set()
    for comp in nx.connected_components(g):
        rows = tuple(sorted(i for s, i in comp if s == "r"))
        cols = tuple(sorted(j for s, j in comp if s == "c"))
        q = sum(Fraction(v) for v in np.array(r)[list(rows)]) / \
            sum(Fraction(v) for v in np.array(c)[list(cols)])
        out.add((rows, cols, q))
    return out


class TestPhi:
    def test_l_shape(self):
        res = phi(L_SHAPE.support(), L_SHAPE.row_targets, L_SHAPE.col_targets)
        assert res.rows == frozenset({0})
        assert res.cols == frozenset({0})
        assert res.ratio == 3

    def test_triangle_maximal_cardinality(self):
        res = phi(TRIANGLE.support(), TRIANGLE.row_targets,
                  TRIANGLE.col_targets)
        assert res.rows == frozenset({0, 1})
        assert res.ratio == 1

    def test_paper_instance_single_block(self, paper_problem):
        res = phi(paper_problem.support(), paper_problem.row_targets,
                  paper_problem.col_targets)
        assert res.rows == frozenset({0, 1, 2, 3})
        assert res.ratio == Fraction(17, 11)

    def test_against_brute_force(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            p = random_instance(rng)
            res = phi(p.support(), p.row_targets, p.col_targets)
            ratio, rows, _ = brute_phi(p.support(), p.row_targets,
                                       p.col_targets)
            assert res.ratio == ratio
            assert res.rows == rows

    def test_block_feasible_at_its_ratio(self):
        rng = np.random.default_rng(32)
        for _ in range(50):
            p = random_instance(rng, max_m=5, max_n=5)
            res = phi(p.support(), p.row_targets, p.col_targets)
            sub = p.support().restrict(res.rows, res.cols)
            cert = hall_check(sub, [p.row_targets[i] for i in sorted(res.rows)],
                              [p.col_targets[j] for j in sorted(res.cols)],
                              res.ratio)
            assert cert.feasible


class TestStepOne:
    def test_l_shape_two_peels(self):
        s = step_one(L_SHAPE)
        assert [(b.rows, b.cols, b.quotient) for b in s.blocks] == \
            [((0,), (0,), Fraction(3)), ((1,), (1,), Fraction(1, 3))]

    def test_triangle_single_peel(self):
        s = step_one(TRIANGLE)
        assert [(b.rows, b.cols, b.quotient) for b in s.blocks] == \
            [((0, 1), (0, 1), Fraction(1))]

    def test_paper_single_block(self, paper_problem):
        s = step_one(paper_problem)
        assert len(s.blocks) == 1
        assert s.blocks[0].quotient == Fraction(17, 11)

    def test_quotients_strictly_decrease(self):
        rng = np.random.default_rng(33)
        for _ in range(50):
            p = random_instance(rng, max_m=5, max_n=5)
            s = step_one(p)
            qs = [b.quotient for b in s.blocks]
            assert all(a > b for a, b in zip(qs, qs[1:]))
            s.check_partition(p.num_rows, p.num_cols)


class TestStepTwo:
    def test_triangle_splits_to_diagonal(self):
        block = Block((0, 1), (0, 1), Fraction(1))
        subs = step_two(TRIANGLE, block)
        assert [(b.rows, b.cols) for b in subs] == [((0,), (0,)), ((1,), (1,))]
        assert all(b.quotient == 1 for b in subs)

    def test_full_support_block_unchanged(self):
        p = problem([[1, 1], [1, 1]], [1, 1], [1, 1])
        block = Block((0, 1), (0, 1), Fraction(1))
        assert step_two(p, block) == [block]

    def test_paper_block_unchanged(self, paper_problem):
        block = Block((0, 1, 2, 3), (0, 1, 2, 3), Fraction(17, 11))
        assert step_two(paper_problem, block) == [block]


class TestDecompose:
    def test_triangle(self):
        d = decompose(TRIANGLE)
        assert blocks_as_sets(d) == {((0,), (0,), Fraction(1)),
                                     ((1,), (1,), Fraction(1))}
        assert d.peel_order == (0, 0)

    def test_l_shape(self):
        d = decompose(L_SHAPE)
        assert blocks_as_sets(d) == {((0,), (0,), Fraction(3)),
                                     ((1,), (1,), Fraction(1, 3))}

    def test_disconnected_diagonal(self):
        d = decompose(problem([[1, 0], [0, 1]], [1, 1], [1, 1]))
        assert blocks_as_sets(d) == {((0,), (0,), Fraction(1)),
                                     ((1,), (1,), Fraction(1))}

    def test_edge_quotient_ordering(self):
        # Every support entry joins a row block with quotient <= its
        # column block's quotient, equal exactly within one block.
        rng = np.random.default_rng(34)
        for _ in range(50):
            p = random_instance(rng, max_m=5, max_n=5)
            d = decompose(p)
            row_q = {}
            col_q = {}
            block_of_row = {}
            block_of_col = {}
            for k, b in enumerate(d.blocks):
                for i in b.rows:
                    row_q[i], block_of_row[i] = b.quotient, k
                for j in b.cols:
                    col_q[j], block_of_col[j] = b.quotient, k
            for (i, j) in p.support().pairs:
                assert row_q[i] <= col_q[j]
                if block_of_row[i] == block_of_col[j]:
                    assert row_q[i] == col_q[j]

    def test_target_scaling_same_index_sets(self):
        rng = np.random.default_rng(35)
        for _ in range(20):
            p = random_instance(rng, max_m=4, max_n=4)
            t = Fraction(int(rng.integers(1, 30)), int(rng.integers(2, 9)))
            scaled = validate_problem(
                p.matrix, [t * v for v in p.row_targets], p.col_targets)
            d1 = decompose(p)
            d2 = decompose(scaled)
            assert [(b.rows, b.cols, t * b.quotient) for b in d1.blocks] == \
                [(b.rows, b.cols, b.quotient) for b in d2.blocks]


class TestPrune:
    def test_cross_block_entry_removed(self):
        d = decompose(L_SHAPE)
        pruned = prune(L_SHAPE, d)
        assert pruned.matrix == ((Fraction(1), Fraction(0)),
                                 (Fraction(0), Fraction(1)))
        assert pruned.row_targets == L_SHAPE.row_targets

    def test_single_block_unchanged(self, paper_problem):
        d = decompose(paper_problem)
        assert prune(paper_problem, d).matrix == paper_problem.matrix

    def test_triangle(self):
        d = decompose(TRIANGLE)
        pruned = prune(TRIANGLE, d)
        assert pruned.matrix == ((Fraction(1), Fraction(0)),
                                 (Fraction(0), Fraction(1)))


class TestLimitPair:
    def test_l_shape_forced_blocks(self):
        lp = limit_pair(L_SHAPE)
        np.testing.assert_allclose(lp.B, [[3, 0], [0, 1]])
        np.testing.assert_allclose(lp.C, [[1, 0], [0, 3]])

    def test_triangle_identity_limits(self):
        lp = limit_pair(TRIANGLE)
        np.testing.assert_allclose(lp.B, np.eye(2))
        np.testing.assert_allclose(lp.C, np.eye(2))

    def test_paper_single_block_limit(self, paper_problem):
        from conftest import PAPER_B500, PAPER_C500

        lp = limit_pair(paper_problem)
        assert abs(lp.B[0, 0] - 6) < 1e-9
        np.testing.assert_allclose(
            lp.B.sum(axis=0), [68 / 11, 68 / 11, 34 / 11, 17 / 11], rtol=1e-9)
        assert abs(lp.C[0, 0] - 66 / 17) < 1e-6
        nz = PAPER_B500 > 0
        assert np.all(np.abs(lp.B[nz] / PAPER_B500[nz] - 1) < 0.01)
        nz = PAPER_C500 > 0
        assert np.all(np.abs(lp.C[nz] / PAPER_C500[nz] - 1) < 0.01)

    def test_block_marginals_and_ratio_identity(self):
        rng = np.random.default_rng(36)
        for _ in range(20):
            p = random_instance(rng, max_m=5, max_n=5)
            lp = limit_pair(p)
            r = p.float_row_targets()
            c = p.float_col_targets()
            np.testing.assert_allclose(lp.B.sum(axis=1), r, rtol=1e-8)
            np.testing.assert_allclose(lp.C.sum(axis=0), c, rtol=1e-8)
            for b in lp.decomposition.blocks:
                sub_B = lp.B[np.ix_(b.rows, b.cols)]
                sub_C = lp.C[np.ix_(b.rows, b.cols)]
                nz = sub_B != 0
                assert np.all(np.abs(
                    sub_C[nz] / (sub_B[nz] / float(b.quotient)) - 1) < 1e-9)

    def test_matches_naive_isp(self):
        rng = np.random.default_rng(37)
        for _ in range(20):
            p = random_instance(rng, max_m=5, max_n=5)
            B_naive, C_naive = naive_isp(p.float_matrix(),
                                         p.float_row_targets(),
                                         p.float_col_targets(), 100_000)
            lp = limit_pair(p)
            assert np.abs(lp.B - B_naive).max() < 1e-3
            assert np.abs(lp.C - C_naive).max() < 1e-3
            assert blocks_as_sets(lp.decomposition) == \
                decomposition_from_limit(B_naive, p.row_targets,
                                         p.col_targets)

    def test_pruning_invariance(self):
        rng = np.random.default_rng(38)
        for _ in range(10):
            p = random_instance(rng, max_m=4, max_n=4)
            d = decompose(p)
            lp1 = limit_pair(p)
            lp2 = limit_pair(prune(p, d))
            assert np.abs(lp1.B - lp2.B).max() < 1e-8
            assert np.abs(lp1.C - lp2.C).max() < 1e-8

    def test_one_by_one(self):
        lp = limit_pair(problem([[5]], [2], [3]))
        assert lp.B[0, 0] == 2 and lp.C[0, 0] == 3
