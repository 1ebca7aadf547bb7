import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interlace_lab.errors import BudgetExceeded, EmptySelection, UnknownLabel
from interlace_lab.interlace import k_fold_interlace
from interlace_lab.labels import label_key, label_to_sexpr, parse_label, parse_labels
from interlace_lab.matrix import (
    BooleanMatrix,
    canonicalize,
    extract,
    find_subgame,
    is_subgame,
    phi,
    real_rank_lower_bound,
    transpose,
)
from interlace_lab.solver import Solver


def random_matrix(rng, m, n):
    bits = [[rng.randint(0, 1) for _ in range(n)] for _ in range(m)]
    return BooleanMatrix(list(range(1, m + 1)), list(range(1, n + 1)), bits)


# ---------------------------------------------------------------------------
# labels

def test_label_order_is_total_and_stable():
    labels = [3, (1, 2), 1, (1, (2, 3)), (), (2,)]
    ordered = sorted(labels, key=label_key)
    assert ordered == sorted(labels, key=label_key)
    assert ordered[0] == 1  # ints before tuples


def test_label_sexpr_roundtrip():
    for lab in [5, (1, 2), (1, (2, 3)), ((1, 2), (3, (4, 5)))]:
        assert parse_label(label_to_sexpr(lab)) == lab
    assert parse_labels("1 (2 3) ((4) 5)") == (1, (2, 3), ((4,), 5))


# ---------------------------------------------------------------------------
# extraction and transpose

def test_extract_identity_restriction():
    m = random_matrix(random.Random(1), 3, 4)
    assert extract(m, m.rows, m.cols) == m


def test_extract_phi_single_entry():
    p = phi()
    sub = extract(p, [(1, 1)], [1])
    assert sub.bits.tolist() == [[1]]


def test_extract_composes():
    rng = random.Random(7)
    m = random_matrix(rng, 4, 4)
    mid = extract(m, [1, 3], [2, 4])
    small = extract(mid, [3], [4])
    assert small == extract(m, [3], [4])


def test_extract_errors():
    p = phi()
    with pytest.raises(EmptySelection):
        extract(p, [], [1])
    with pytest.raises(UnknownLabel):
        extract(p, [(9, 9)], [1])
    with pytest.raises(UnknownLabel):
        extract(p, [(1, 1)], [7])


def test_transpose_of_phi_and_involution():
    p = phi()
    t = transpose(p)
    assert t.shape == (2, 1)
    assert t.bits.tolist() == [[1], [0]]
    m = random_matrix(random.Random(2), 3, 5)
    assert transpose(transpose(m)) == m


# ---------------------------------------------------------------------------
# canonical forms

def test_canonicalize_collapses_duplicate_rows():
    single = BooleanMatrix([1], [1, 2], [[1, 0]])
    double = BooleanMatrix([1, 2], [1, 2], [[1, 0], [1, 0]])
    assert canonicalize(single) == canonicalize(double)
    assert canonicalize(double).n_distinct_rows == 1


def test_canonicalize_invariant_under_shuffle():
    rng = random.Random(3)
    m = random_matrix(rng, 3, 5)
    rows = list(range(3))
    cols = list(range(5))
    rng.shuffle(rows)
    rng.shuffle(cols)
    shuffled = BooleanMatrix(
        [m.rows[i] for i in rows],
        [m.cols[j] for j in cols],
        m.bits[np.ix_(rows, cols)],
    )
    assert canonicalize(m) == canonicalize(shuffled)


def test_canonicalize_phi2_all_column_permutations():
    # brute force: the form is identical under every one of the 4! orders
    m = k_fold_interlace(phi(), 2)
    base = canonicalize(m)
    for perm in itertools.permutations(range(4)):
        shuffled = BooleanMatrix(
            m.rows, [m.cols[j] for j in perm], m.bits[:, list(perm)]
        )
        assert canonicalize(shuffled) == base


def test_canonicalize_is_congruence_for_complexity():
    rng = random.Random(11)
    solver = Solver()
    for _ in range(20):
        m = random_matrix(rng, 3, 5)
        rows = list(range(3))
        cols = list(range(5))
        rng.shuffle(rows)
        rng.shuffle(cols)
        twin = BooleanMatrix(
            [m.rows[i] for i in rows],
            [m.cols[j] for j in cols],
            m.bits[np.ix_(rows, cols)],
        )
        assert canonicalize(m) == canonicalize(twin)
        assert solver.solve_exact(m).value == solver.solve_exact(twin).value


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 5), st.randoms())
def test_canonicalize_permutation_property(m, n, rng):
    bits = [[rng.randint(0, 1) for _ in range(n)] for _ in range(m)]
    mat = BooleanMatrix(list(range(m)), list(range(n)), bits)
    rows = list(range(m))
    cols = list(range(n))
    rng.shuffle(rows)
    rng.shuffle(cols)
    twin = BooleanMatrix(
        [mat.rows[i] for i in rows],
        [mat.cols[j] for j in cols],
        mat.bits[np.ix_(rows, cols)],
    )
    assert canonicalize(mat) == canonicalize(twin)


# ---------------------------------------------------------------------------
# rank bound

def test_rank_bound_examples():
    zeros = BooleanMatrix([1, 2], [1, 2], [[0, 0], [0, 0]])
    assert real_rank_lower_bound(zeros) == 0
    ident = BooleanMatrix(range(4), range(4), np.eye(4, dtype=np.uint8))
    assert real_rank_lower_bound(ident) == 2
    m3 = k_fold_interlace(phi(), 3)
    assert real_rank_lower_bound(m3) <= Solver().solve_exact(m3).value


def test_rank_bound_transpose_invariant():
    rng = random.Random(5)
    for _ in range(10):
        m = random_matrix(rng, 3, 6)
        assert real_rank_lower_bound(m) == real_rank_lower_bound(transpose(m))


# ---------------------------------------------------------------------------
# subgames

def test_subgame_reflexive_and_tiny():
    p = phi()
    assert is_subgame(p, p)
    one = BooleanMatrix([1], [1], [[1]])
    assert is_subgame(one, p)


def test_subgame_phi3_not_in_phi2():
    a = k_fold_interlace(phi(), 3)
    b = k_fold_interlace(phi(), 2)
    assert not is_subgame(a, b)


def test_subgame_witness_is_faithful():
    b = k_fold_interlace(phi(), 2)
    a = extract(b, [(1, (1, 1)), (2, (1, 1))], [(1, 2), (2, 1)])
    witness = find_subgame(a, b)
    assert witness is not None
    for (ra, rb), (ca, cb) in itertools.product(witness.row_map, witness.col_map):
        assert a.entry(ra, ca) == b.entry(rb, cb)


def test_subgame_reflexive_transitive_pool():
    rng = random.Random(23)
    pool = [random_matrix(rng, rng.randint(1, 3), rng.randint(1, 5)) for _ in range(8)]
    for m in pool:
        assert is_subgame(m, m)
    for a, b, c in itertools.product(pool, repeat=3):
        if is_subgame(a, b) and is_subgame(b, c):
            assert is_subgame(a, c)


def test_subgame_budget_is_distinct_from_false():
    a = k_fold_interlace(phi(), 3)
    b = k_fold_interlace(phi(), 4)
    with pytest.raises(BudgetExceeded):
        find_subgame(a, b, node_cap=1)


# ---------------------------------------------------------------------------
# file format

def test_matrix_text_roundtrip():
    m = k_fold_interlace(phi(), 2)
    again = BooleanMatrix.from_text(m.to_text())
    assert again == m
    assert m.to_text().endswith("\n")
