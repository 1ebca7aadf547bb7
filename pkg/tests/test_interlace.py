import random
from fractions import Fraction

import pytest

from interlace_lab.errors import AlphabetMismatch, SizeOverflow
from interlace_lab.interlace import binary_interlace, k_fold_interlace, relaxed_interlace
from interlace_lab.matrix import BooleanMatrix, canonicalize, extract, phi
from interlace_lab.reservoir import build_balanced_set
from interlace_lab.solver import Solver


def test_binary_interlace_of_phi_matches_twofold():
    two = binary_interlace(phi(), phi())
    assert two.shape == (2, 4)
    assert canonicalize(two) == canonicalize(k_fold_interlace(phi(), 2))


def test_binary_interlace_cardinalities():
    rng = random.Random(4)
    f = BooleanMatrix([1, 2], [1, 2], [[rng.randint(0, 1)] * 2] * 2)
    g = BooleanMatrix([3, 4], [3, 4], [[1, 0], [0, 1]])
    h = binary_interlace(f, g)
    assert h.n_rows == f.n_rows + g.n_rows
    assert h.n_cols == f.n_cols * g.n_cols


def test_binary_interlace_entry_rule():
    f = BooleanMatrix([1], [1, 2], [[1, 0]])
    g = BooleanMatrix([1], [1, 2], [[0, 1]])
    h = binary_interlace(f, g)
    for c1 in f.cols:
        for c2 in g.cols:
            assert h.entry((1, 1), (c1, c2)) == f.entry(1, c1)
            assert h.entry((2, 1), (c1, c2)) == g.entry(1, c2)


@pytest.mark.parametrize("x,y", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_interlace_additivity(x, y):
    pool = [
        phi(),
        BooleanMatrix([1], [1, 2], [[0, 1]]),
        BooleanMatrix([1, 2], [1, 2], [[1, 0], [0, 1]]),
    ]
    for m in pool:
        lhs = binary_interlace(k_fold_interlace(m, x), k_fold_interlace(m, y))
        rhs = k_fold_interlace(m, x + y)
        assert canonicalize(lhs) == canonicalize(rhs)


def test_k_fold_identity_case():
    one = k_fold_interlace(phi(), 1)
    assert one.rows == ((1, (1, 1)),)
    assert canonicalize(one) == canonicalize(phi())


def test_k_fold_three_is_index_pattern():
    m = k_fold_interlace(phi(), 3)
    assert m.shape == (3, 8)
    for i in (1, 2, 3):
        for col in m.cols:
            assert m.entry((i, (1, 1)), col) == phi().entry((1, 1), col[i - 1])


def test_k_fold_four_complexity():
    assert Solver().solve_exact(k_fold_interlace(phi(), 4)).value == 3


def test_k_fold_cell_budget():
    with pytest.raises(SizeOverflow):
        k_fold_interlace(phi(), 30)


def test_projection_identity():
    m = BooleanMatrix([1, 2], [1, 2], [[1, 0], [0, 1]])
    inter = k_fold_interlace(m, 3)
    block2 = [(2, r) for r in m.rows]
    sub = extract(inter, block2, inter.cols)
    assert canonicalize(sub) == canonicalize(m)


def test_relaxed_with_full_reservoir_equals_classical():
    m = phi()
    s = build_balanced_set(3, 2, m.cols, full_product=True)
    relaxed = relaxed_interlace(m, 3, s)
    assert canonicalize(relaxed) == canonicalize(k_fold_interlace(m, 3))


def test_relaxed_cardinalities_and_alphabet_check():
    m = phi()
    s = build_balanced_set(4, 2, m.cols, epsilon=Fraction(1, 16))
    relaxed = relaxed_interlace(m, 4, s)
    assert relaxed.n_rows == 4 * m.n_rows
    assert relaxed.n_cols <= s.n_samples
    other = BooleanMatrix([1], [7, 8, 9], [[1, 0, 1]])
    with pytest.raises(AlphabetMismatch):
        relaxed_interlace(other, 4, s)


def test_relaxed_reservoir_pairs_exhibit_all_patterns():
    # q=4, t=2 over a 2-letter alphabet: every block pair sees all 4 patterns
    m = phi()
    s = build_balanced_set(4, 2, m.cols, epsilon=Fraction(1, 16))
    distinct = s.distinct_tuples()
    for i in range(4):
        for j in range(i + 1, 4):
            pairs = {(int(a), int(b)) for a, b in zip(distinct[:, i], distinct[:, j])}
            assert pairs == {(0, 0), (0, 1), (1, 0), (1, 1)}
