import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interlace_lab.errors import BudgetExceeded, GuardExceeded, MalformedTree
from interlace_lab.interlace import k_fold_interlace
from interlace_lab.matrix import (
    BooleanMatrix,
    canonicalize,
    extract,
    phi,
    real_rank_lower_bound,
    transpose,
)
from interlace_lab.solver import (
    Internal,
    Leaf,
    Solver,
    naive_reference,
    tree_from_sexpr,
    tree_to_sexpr,
    verify_protocol,
)


def random_matrix(rng, m, n):
    bits = [[rng.randint(0, 1) for _ in range(n)] for _ in range(m)]
    return BooleanMatrix(list(range(1, m + 1)), list(range(1, n + 1)), bits)


def test_decide_examples():
    solver = Solver()
    ones = BooleanMatrix(range(3), range(3), np.ones((3, 3), dtype=np.uint8))
    assert solver.decide(ones, 0)
    p = phi()
    assert not solver.decide(p, 0)
    assert solver.decide(p, 1)
    m3 = k_fold_interlace(p, 3)
    assert not solver.decide(m3, 2)
    assert solver.decide(m3, 3)
    assert naive_reference(m3) == 3


def test_staircase_with_certificates():
    solver = Solver()
    expected = {1: 1, 2: 2, 3: 3, 4: 3, 5: 4, 6: 4}
    for k, want in expected.items():
        m = k_fold_interlace(phi(), k)
        res = solver.solve_exact(m)
        assert res.value == want
        assert res.certificate.depth == want
        assert verify_protocol(m, res.certificate)


def test_one_bit_step_property():
    solver = Solver()
    values = [solver.solve_exact(k_fold_interlace(phi(), k)).value for k in range(1, 7)]
    for k in range(1, 6):
        step = values[k] - values[k - 1]
        assert step in (0, 1)
        # the step is 1 exactly when k+1 = 2^a + 1 leaves a power of two
        assert (step == 1) == (k & (k - 1) == 0)


def test_identity_matrix():
    ident = BooleanMatrix(range(4), range(4), np.eye(4, dtype=np.uint8))
    assert Solver().solve_exact(ident).value == 3
    assert naive_reference(ident) == 3


def test_verify_protocol_hand_written():
    p = phi()
    good = Internal("col", (1,), (2,), Leaf(1), Leaf(0))
    assert verify_protocol(p, good)
    swapped = Internal("col", (1,), (2,), Leaf(0), Leaf(1))
    assert not verify_protocol(p, swapped)
    malformed = Internal("col", (1,), (1,), Leaf(1), Leaf(0))
    with pytest.raises(MalformedTree):
        verify_protocol(p, malformed)


def test_naive_guard():
    big = BooleanMatrix(range(5), range(5), np.eye(5, dtype=np.uint8))
    with pytest.raises(GuardExceeded):
        naive_reference(big)


def test_naive_examples():
    assert naive_reference(phi()) == 1
    assert naive_reference(k_fold_interlace(phi(), 2)) == 2


def test_node_cap_budget():
    m = k_fold_interlace(phi(), 3)
    with pytest.raises(BudgetExceeded):
        Solver(node_cap=1).solve_exact(m)


def test_solver_agrees_with_naive_on_pool():
    rng = random.Random(99)
    solver = Solver()
    for _ in range(60):
        m = random_matrix(rng, rng.randint(1, 4), rng.randint(1, 8))
        res = solver.solve_exact(m)
        assert res.value == naive_reference(m)
        assert verify_protocol(m, res.certificate)
        assert res.certificate.depth == res.value
        assert real_rank_lower_bound(m) <= res.value


def test_transpose_and_submatrix_invariants():
    rng = random.Random(17)
    solver = Solver()
    for _ in range(20):
        m = random_matrix(rng, rng.randint(1, 4), rng.randint(2, 8))
        d = solver.solve_exact(m).value
        assert solver.solve_exact(transpose(m)).value == d
        rows = rng.sample(list(m.rows), rng.randint(1, m.n_rows))
        cols = rng.sample(list(m.cols), rng.randint(1, m.n_cols))
        assert solver.solve_exact(extract(m, rows, cols)).value <= d


def test_duplication_invariance():
    solver = Solver()
    m = k_fold_interlace(phi(), 2)
    doubled = BooleanMatrix(
        list(m.rows) + [("dup", r) for r in m.rows],
        m.cols,
        np.vstack([m.bits, m.bits]),
    )
    assert canonicalize(doubled) == canonicalize(m)
    assert solver.solve_exact(doubled).value == solver.solve_exact(m).value


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 5), st.randoms())
def test_solver_matches_naive_property(m, n, rng):
    bits = [[rng.randint(0, 1) for _ in range(n)] for _ in range(m)]
    mat = BooleanMatrix(list(range(m)), list(range(n)), bits)
    solver = Solver()
    res = solver.solve_exact(mat)
    assert res.value == naive_reference(mat)
    assert verify_protocol(mat, res.certificate)


def test_tree_sexpr_roundtrip():
    solver = Solver()
    m = k_fold_interlace(phi(), 3)
    res = solver.solve_exact(m)
    text = tree_to_sexpr(res.certificate)
    again = tree_from_sexpr(text)
    assert again == res.certificate
    assert verify_protocol(m, again)
