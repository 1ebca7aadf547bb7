"""The three interlacing constructors: binary, k-fold, and relaxed.

Rows of an interlaced matrix are (block, original row label) pairs;
columns are tuples of original column labels, one per block.  The
relaxed form draws its column tuples from a balanced reservoir instead
of the full product, collapsing duplicate tuples (duplicates never
change deterministic communication complexity; the multiset statistics
stay available on the reservoir itself).
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import AlphabetMismatch, SizeOverflow
from .matrix import BooleanMatrix
from .reservoir import BalancedColumnSet

DEFAULT_CELL_BUDGET = 1 << 26


def binary_interlace(f: BooleanMatrix, g: BooleanMatrix) -> BooleanMatrix:
    """Disjoint-union rows tagged (1,.)/(2,.), cartesian-product columns."""
    rows = [(1, r) for r in f.rows] + [(2, r) for r in g.rows]
    cols = [(c1, c2) for c1 in f.cols for c2 in g.cols]
    top = np.repeat(f.bits, g.n_cols, axis=1)
    bottom = np.tile(g.bits, (1, f.n_cols))
    return BooleanMatrix(rows, cols, np.vstack([top, bottom]))


def k_fold_interlace(
    f: BooleanMatrix, k: int, cell_budget: int = DEFAULT_CELL_BUDGET
) -> BooleanMatrix:
    """Interlace k independent slots of f; column (y_1..y_k), row (i, j) -> f(j, y_i)."""
    if k < 1:
        raise ValueError("interlace order k must be >= 1")
    n = f.n_cols
    if n**k > cell_budget or k * f.n_rows * (n**k) > cell_budget:
        raise SizeOverflow(
            f"k-fold interlace would need {k * f.n_rows * n**k} cells (budget {cell_budget})"
        )
    cols = list(itertools.product(f.cols, repeat=k))
    # index of slot i's column choice, per interlaced column
    sel = np.array(
        [idx for idx in itertools.product(range(n), repeat=k)], dtype=np.int64
    )
    blocks = [f.bits[:, sel[:, i]] for i in range(k)]
    rows = [(i, r) for i in range(1, k + 1) for r in f.rows]
    return BooleanMatrix(rows, cols, np.vstack(blocks))


def relaxed_interlace(
    m: BooleanMatrix,
    q: int,
    s: BalancedColumnSet,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> BooleanMatrix:
    """Interlace q slots of m over the reservoir's distinct column tuples."""
    if s.q != q:
        raise AlphabetMismatch(f"reservoir has q={s.q}, interlace asked q={q}")
    if tuple(s.alphabet) != tuple(m.cols):
        raise AlphabetMismatch("reservoir alphabet differs from the matrix column set")
    distinct = s.distinct_tuples()  # (N', q) array of alphabet indices
    n_tuples = distinct.shape[0]
    if q * m.n_rows * n_tuples > cell_budget:
        raise SizeOverflow(
            f"relaxed interlace would need {q * m.n_rows * n_tuples} cells"
        )
    cols = [tuple(m.cols[i] for i in row) for row in distinct.tolist()]
    blocks = [m.bits[:, distinct[:, i]] for i in range(q)]
    rows = [(i, r) for i in range(1, q + 1) for r in m.rows]
    return BooleanMatrix(rows, cols, np.vstack(blocks))
