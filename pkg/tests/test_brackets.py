import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interlace_lab.brackets import (
    BracketSpec,
    Equipartition,
    block_balance,
    ceil_frac,
    ceil_mul_pow,
    enumerate_members,
    family_complexity,
    relaxed_to_classical,
)
from interlace_lab.errors import DensityTooLow, FamilyTooLarge
from interlace_lab.interlace import k_fold_interlace, relaxed_interlace
from interlace_lab.matrix import BooleanMatrix, canonicalize, phi
from interlace_lab.reservoir import build_balanced_set
from interlace_lab.solver import Solver

F = Fraction


def test_ceil_mul_pow_exact_roots():
    # ceil(4 * (1/2)^(2/3)) = ceil(2.52) = 3
    assert ceil_mul_pow(4, F(1, 2), F(2, 3)) == 3
    assert ceil_mul_pow(16, F(1, 2)) == 8
    assert ceil_mul_pow(7, F(1)) == 7
    assert ceil_mul_pow(5, F(1, 3), F(0)) == 5


def test_enumerate_members_tiny_specs():
    p = phi()
    only = list(enumerate_members(BracketSpec(p, 1, F(1), F(1))))
    assert len(only) == 1 and canonicalize(only[0]) == canonicalize(p)
    halves = list(enumerate_members(BracketSpec(p, 1, F(1), F(1, 2))))
    assert len(halves) == 2
    assert sorted(m.bits.tolist()[0][0] for m in halves) == [0, 1]
    twofold = list(enumerate_members(BracketSpec(p, 2, F(1), F(1))))
    assert len(twofold) == 1
    assert canonicalize(twofold[0]) == canonicalize(k_fold_interlace(p, 2))


def test_family_complexity_values():
    solver = Solver()
    p = phi()
    assert family_complexity(BracketSpec(p, 1, F(1), F(1, 2)), solver=solver).value == 0
    assert family_complexity(BracketSpec(p, 2, F(1), F(1)), solver=solver).value == 2
    res = family_complexity(BracketSpec(p, 4, F(1), F(1)), solver=solver)
    assert res.value >= 3  # matches the hard-seed floor ceil(log 4) + 1


def test_family_too_large_and_sampling():
    spec = BracketSpec(phi(), 4, F(1), F(1, 2))
    with pytest.raises(FamilyTooLarge):
        family_complexity(spec, cap=10)
    solver = Solver()
    sampled = family_complexity(spec, cap=10, samples=25, solver=solver, seed=5)
    exact = family_complexity(spec, cap=20_000, solver=solver)
    assert not sampled.exact
    assert sampled.value >= exact.value


def test_block_balance_spec_cases():
    full = [(b, r) for b in range(1, 5) for r in range(1, 5)]
    j, kept = block_balance(full, 4, 4, F(1, 2))
    assert j == (1, 2, 3, 4) and kept == frozenset(full)

    spread = [(1, 1), (1, 2), (1, 3), (1, 4), (2, 1), (3, 1), (4, 1)]
    assert block_balance(spread, 4, 4, F(1, 2)) == ((), frozenset())

    lopsided = [(1, 1), (1, 2), (1, 3), (1, 4), (2, 1)]
    j, kept = block_balance(lopsided, 2, 4, F(1, 2))
    assert j == (1,)
    assert kept == frozenset({(1, 1), (1, 2), (1, 3), (1, 4)})


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.sampled_from([F(1, 8), F(1, 4), F(1, 2), F(3, 4), F(1)]), st.randoms())
def test_block_balance_quota_property(q, m, x, rng):
    selection = [
        (b, r)
        for b in range(1, q + 1)
        for r in range(1, m + 1)
        if rng.random() < 0.6
    ]
    t_quota = ceil_frac(m * x)
    beta = F(len(selection), q * m)
    j, kept = block_balance(selection, q, m, x)
    if beta < x:
        assert j == () and kept == frozenset()
    else:
        target = q if x == 1 else ceil_frac(q * (beta - x) / (1 - x))
        assert len(j) == target
        for b in j:
            assert sum(1 for bb, _ in kept if bb == b) >= t_quota


def equipartition_over(base, q, blocks, quota, rng):
    selection = set()
    for b in blocks:
        selection.update((b, r) for r in rng.sample(list(base.rows), quota))
    return Equipartition(
        k=q,
        base_rows=base.rows,
        q_blocks=frozenset(blocks),
        quota=quota,
        selection=frozenset(selection),
    )


def test_relaxed_to_classical_full_product_is_classical():
    base = phi()
    s = build_balanced_set(3, 3, base.cols, full_product=True)
    n = relaxed_interlace(base, 3, s)
    rng = random.Random(0)
    ep = equipartition_over(base, 3, (1, 2, 3), 1, rng)
    res = relaxed_to_classical(
        n, s, (1, 2, 3), ep, list(range(s.n_samples)), F(15, 16), base=base
    )
    assert res.certificate_ok
    assert res.y_prime == F(15, 16)  # epsilon = 0 for the complete reservoir
    assert res.distinct_patterns == 8
    assert canonicalize(res.member) == canonicalize(k_fold_interlace(base, 3))


def test_relaxed_to_classical_membership():
    base = phi()
    s = build_balanced_set(3, 2, base.cols, full_product=True)
    n = relaxed_interlace(base, 3, s)
    rng = random.Random(1)
    ep = equipartition_over(base, 3, (1, 3), 1, rng)
    y = F(3, 4)
    res = relaxed_to_classical(n, s, (1, 3), ep, list(range(s.n_samples)), y, base=base)
    assert res.certificate_ok
    spec = BracketSpec(base, 2, F(1), res.y_prime)
    members = list(enumerate_members(spec))
    assert any(res.member == mem for mem in members)


def test_relaxed_to_classical_density_error():
    # a reservoir whose real skew exceeds its stored accuracy claim
    import numpy as np

    from interlace_lab.reservoir import BalancedColumnSet, GeneratorMeta

    base = phi()
    s_bad = BalancedColumnSet(
        q=2,
        t=1,
        alphabet=base.cols,
        epsilon=F(0),
        tuples=np.array([[0, 0]] * 4 + [[1, 1]], dtype=np.uint16),
        generator_meta=GeneratorMeta(mode="full", degree=0, poly=0, samples=5),
        realized_epsilon=F(0),
    )
    n = relaxed_interlace(base, 2, s_bad)
    rng = random.Random(2)
    ep = equipartition_over(base, 2, (1,), 1, rng)
    with pytest.raises(DensityTooLow):
        relaxed_to_classical(n, s_bad, (1,), ep, [0, 1, 2, 3], F(3, 5), base=base)
