"""Problem representation, index-set algebra and exact scalar helpers.

Two scalar regimes coexist in this package: arbitrary-precision rationals
(``fractions.Fraction``) for every combinatorial decision, and 64-bit floats
for the iterative scaling loop. Ratio comparisons and tightness checks are
exact equalities, so the combinatorial side never touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


# --------------------------------------------------------------------------
# Errors
# --------------------------------------------------------------------------

class ProblemError(ValueError):
    """Base class for invalid problem data."""


class ZeroRowError(ProblemError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} of the matrix is all zeros")


class ZeroColError(ProblemError):
    def __init__(self, col: int):
        self.col = col
        super().__init__(f"column {col} of the matrix is all zeros")


class NonPositiveTargetError(ProblemError):
    def __init__(self, which: str, index: int, value):
        self.which = which
        self.index = index
        super().__init__(f"{which} target {index} is {value}, must be > 0")


class DimensionMismatchError(ProblemError):
    pass


class NegativeEntryError(ProblemError):
    def __init__(self, row: int, col: int, value):
        self.row = row
        self.col = col
        super().__init__(f"entry ({row}, {col}) is negative: {value}")


class EmptyInputError(ProblemError):
    pass


class NonPositiveError(ProblemError):
    pass


class ZeroRowSumError(ProblemError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} sums to zero, cannot adjust")


class ZeroColSumError(ProblemError):
    def __init__(self, col: int):
        self.col = col
        super().__init__(f"column {col} sums to zero, cannot adjust")


class SupportMismatchError(ProblemError):
    pass


class InfeasibleInstanceError(ProblemError):
    pass


class TotalsMismatchError(ProblemError):
    pass


class InfeasibleBlockError(ProblemError):
    pass


class EmptyBlockSupportError(ProblemError):
    pass


class ParseError(ProblemError):
    def __init__(self, message: str, line: int | None = None,
                 col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" at line {line}" + (f", column {col}" if col is not None else "")
        super().__init__(message + where)


# --------------------------------------------------------------------------
# Exact scalar conversion
# --------------------------------------------------------------------------

def as_fraction(x) -> Fraction:
    """Convert a scalar to an exact rational.

    Decimal text ("0.25") and fraction text ("17/11") convert exactly.
    Floats convert to their exact binary value; prefer strings when the
    input is decimal data.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"cannot parse {x!r} as a number") from exc
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


# --------------------------------------------------------------------------
# Domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportPattern:
    """Positions of nonzero entries of an m-by-n matrix."""

    num_rows: int
    num_cols: int
    pairs: frozenset  # of (row, col)

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[Fraction]]) -> "SupportPattern":
        m = len(matrix)
        n = len(matrix[0]) if m else 0
        pairs = frozenset(
            (i, j) for i in range(m) for j in range(n) if matrix[i][j] != 0
        )
        return cls(m, n, pairs)

    def row_adjacency(self) -> list:
        """Columns adjacent to each row, sorted."""
        adj: list = [[] for _ in range(self.num_rows)]
        for i, j in sorted(self.pairs):
            adj[i].append(j)
        return adj

    def restrict(self, rows: Iterable[int], cols: Iterable[int]) -> "SupportPattern":
        """Sub-pattern on the given global index sets, reindexed from 0."""
        rows = sorted(rows)
        cols = sorted(cols)
        rmap = {g: k for k, g in enumerate(rows)}
        cmap = {g: k for k, g in enumerate(cols)}
        pairs = frozenset(
            (rmap[i], cmap[j]) for (i, j) in self.pairs
            if i in rmap and j in cmap
        )
        return SupportPattern(len(rows), len(cols), pairs)


@dataclass(frozen=True)
class Problem:
    """Nonnegative matrix with positive target row and column sums.

    Entries and targets are exact rationals; float views for the scaling
    loop are produced on demand.
    """

    matrix: tuple          # tuple of row tuples of Fraction
    row_targets: tuple     # of Fraction
    col_targets: tuple     # of Fraction

    @property
    def num_rows(self) -> int:
        return len(self.row_targets)

    @property
    def num_cols(self) -> int:
        return len(self.col_targets)

    def support(self) -> SupportPattern:
        return SupportPattern.from_matrix(self.matrix)

    def float_matrix(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.matrix],
                        dtype=float)

    def float_row_targets(self) -> np.ndarray:
        return np.array([float(v) for v in self.row_targets], dtype=float)

    def float_col_targets(self) -> np.ndarray:
        return np.array([float(v) for v in self.col_targets], dtype=float)


def validate_problem(matrix, row_targets, col_targets) -> Problem:
    """Check and freeze problem data; raises ProblemError subclasses."""
    rows = [tuple(as_fraction(v) for v in row) for row in matrix]
    r = tuple(as_fraction(v) for v in row_targets)
    c = tuple(as_fraction(v) for v in col_targets)
    m, n = len(rows), len(c)
    if m == 0 or n == 0:
        raise DimensionMismatchError("matrix must be at least 1x1")
    if len(r) != m:
        raise DimensionMismatchError(
            f"{len(r)} row targets for {m} matrix rows")
    if any(len(row) != n for row in rows):
        raise DimensionMismatchError("ragged matrix or wrong column count")
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if v < 0:
                raise NegativeEntryError(i, j, v)
    for i, v in enumerate(r):
        if v <= 0:
            raise NonPositiveTargetError("row", i, v)
    for j, v in enumerate(c):
        if v <= 0:
            raise NonPositiveTargetError("column", j, v)
    for i, row in enumerate(rows):
        if all(v == 0 for v in row):
            raise ZeroRowError(i)
    for j in range(n):
        if all(row[j] == 0 for row in rows):
            raise ZeroColError(j)
    return Problem(tuple(rows), r, c)


@dataclass(frozen=True)
class Block:
    """A pair of row and column index sets with its exact quotient."""

    rows: tuple      # sorted row indices
    cols: tuple      # sorted column indices
    quotient: Fraction

    @classmethod
    def make(cls, rows: Iterable[int], cols: Iterable[int],
             row_targets: Sequence[Fraction],
             col_targets: Sequence[Fraction]) -> "Block":
        rows = tuple(sorted(rows))
        cols = tuple(sorted(cols))
        if not rows or not cols:
            raise EmptyInputError("block needs nonempty row and column sets")
        q = marginal_sum(row_targets, rows) / marginal_sum(col_targets, cols)
        return cls(rows, cols, q)


@dataclass(frozen=True)
class Splitting:
    """Paired partitions of the row and column index sets into blocks."""

    blocks: tuple  # of Block

    def check_partition(self, num_rows: int, num_cols: int) -> None:
        rows = [i for b in self.blocks for i in b.rows]
        cols = [j for b in self.blocks for j in b.cols]
        if sorted(rows) != list(range(num_rows)) or \
                sorted(cols) != list(range(num_cols)):
            raise ProblemError("blocks do not partition the index sets")

    def is_refinement_of(self, other: "Splitting") -> bool:
        """True when every block here sits inside some block of other."""
        for b in self.blocks:
            if not any(set(b.rows) <= set(o.rows) and set(b.cols) <= set(o.cols)
                       for o in other.blocks):
                return False
        return True


@dataclass(frozen=True)
class Decomposition(Splitting):
    """Limit-point splitting; peel_order[k] is the step-I group of block k."""

    peel_order: tuple = field(default=())

    def group_quotients(self) -> list:
        """Quotient of each step-I group, in peel order."""
        out: dict = {}
        for b, g in zip(self.blocks, self.peel_order):
            out.setdefault(g, b.quotient)
        return [out[g] for g in sorted(out)]

    def first_group_merged(self) -> tuple:
        """Union of the maximal-quotient blocks: (rows, cols)."""
        rows: set = set()
        cols: set = set()
        for b, g in zip(self.blocks, self.peel_order):
            if g == 0:
                rows |= set(b.rows)
                cols |= set(b.cols)
        return tuple(sorted(rows)), tuple(sorted(cols))


# --------------------------------------------------------------------------
# Index-set operations
# --------------------------------------------------------------------------

def neighborhood(support: SupportPattern, rows: Iterable[int]) -> frozenset:
    """Columns having a support entry in some row of the given set."""
    rows = set(rows)
    return frozenset(j for (i, j) in support.pairs if i in rows)


def marginal_sum(targets: Sequence[Fraction], indices: Iterable[int]) -> Fraction:
    """Exact sum of targets over an index set."""
    total = Fraction(0)
    for i in indices:
        total += targets[i]
    return total


def mediant_bounds(p: Sequence, q: Sequence):
    """Extreme component ratios bracketing the combined ratio.

    Returns (lo, hi, all_equal) with lo = min p_i/q_i, hi = max p_i/q_i.
    The combined ratio sum(p)/sum(q) always lies in [lo, hi]; all_equal is
    true exactly when it touches an endpoint, which forces every component
    ratio to coincide.
    """
    p = [as_fraction(v) for v in p]
    q = [as_fraction(v) for v in q]
    if not p or not q:
        raise EmptyInputError("mediant_bounds needs nonempty inputs")
    if len(p) != len(q):
        raise DimensionMismatchError("p and q must have equal length")
    if any(v <= 0 for v in p) or any(v <= 0 for v in q):
        raise NonPositiveError("all entries must be > 0")
    ratios = [a / b for a, b in zip(p, q)]
    lo, hi = min(ratios), max(ratios)
    combined = sum(p, Fraction(0)) / sum(q, Fraction(0))
    assert lo <= combined <= hi
    all_equal = combined == lo or combined == hi
    return lo, hi, all_equal
