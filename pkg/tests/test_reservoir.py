import itertools
from fractions import Fraction

import numpy as np
import pytest

from interlace_lab.errors import DegreeOverflow, SizeOverflow
from interlace_lab.reservoir import (
    IRREDUCIBLE_POLY,
    BalancedColumnSet,
    GeneratorMeta,
    build_balanced_set,
    build_eps_biased_space,
    default_epsilon,
    reservoir_from_text,
    reservoir_to_text,
    verify_balance,
)


def parity_bias(samples: np.ndarray, subset) -> Fraction:
    par = np.zeros(samples.shape[0], dtype=np.int64)
    for i in subset:
        par ^= samples[:, i].astype(np.int64)
    n = samples.shape[0]
    ones = int(par.sum())
    return Fraction(abs(n - 2 * ones), n)


def test_single_bit_marginal():
    samples, _ = build_eps_biased_space(1, Fraction(1, 8))
    assert parity_bias(samples, [0]) <= Fraction(1, 8)


def test_all_parities_within_bias():
    # exhaustive over the 15 non-empty parities of a 4-bit space
    samples, meta = build_eps_biased_space(4, Fraction(1, 16))
    for r in range(1, 5):
        for subset in itertools.combinations(range(4), r):
            assert parity_bias(samples, subset) <= Fraction(1, 16)
    assert meta.samples == samples.shape[0] == 1 << (2 * meta.degree)


def test_degree_budget():
    with pytest.raises(DegreeOverflow):
        build_eps_biased_space(64, Fraction(1, 2**30))


def test_sample_budget():
    # m = 14 stays under the degree budget but 2^28 samples do not fit
    with pytest.raises(SizeOverflow):
        build_eps_biased_space(16, Fraction(1, 1024))


def test_irreducible_table_contents():
    sympy = pytest.importorskip("sympy")
    from sympy import GF, Poly, Symbol

    x = Symbol("x")
    for degree, mask in IRREDUCIBLE_POLY.items():
        coeffs = [(mask >> (degree - i)) & 1 for i in range(degree + 1)]
        poly = Poly(coeffs, x, domain=GF(2))
        assert poly.degree() == degree
        assert poly.is_irreducible, f"degree {degree} polynomial is reducible"


def test_full_product_fallback_is_complete():
    s = build_balanced_set(2, 2, (0, 1), full_product=True)
    assert s.epsilon == 0
    assert sorted(map(tuple, s.tuples.tolist())) == sorted(
        itertools.product((0, 1), repeat=2)
    )
    assert verify_balance(s).max_relative_deviation == 0


def test_balanced_set_q8_t2_passes():
    s = build_balanced_set(8, 2, (0, 1), epsilon=Fraction(1, 64))
    report = verify_balance(s)
    assert report.exhaustive
    assert report.passed
    assert report.max_relative_deviation <= Fraction(1, 64)
    assert s.n_samples <= 4 * s.size_bound()


def test_no_drops_for_power_of_two_alphabet():
    s = build_balanced_set(4, 2, (0, 1, 2, 3), epsilon=Fraction(1, 8))
    assert s.n_samples == s.generator_meta.samples


def test_drops_measured_for_odd_alphabet():
    s = build_balanced_set(3, 1, (0, 1, 2), epsilon=Fraction(1, 4))
    assert s.n_samples < s.generator_meta.samples
    assert s.realized_epsilon is not None


def test_single_coordinate_marginals():
    for p, eps in (((0, 1), Fraction(1, 16)), ((0, 1, 2, 3), Fraction(1, 8))):
        s = build_balanced_set(4, 1, p, epsilon=eps)
        report = verify_balance(s)
        assert report.per_size[0].max_relative_deviation <= s.epsilon or (
            s.realized_epsilon is not None
            and report.per_size[0].max_relative_deviation <= s.realized_epsilon
        )


def test_adversarial_reservoir_fails():
    s = BalancedColumnSet(
        q=3,
        t=2,
        alphabet=(0, 1),
        epsilon=Fraction(1, 16),
        tuples=np.zeros((1, 3), dtype=np.uint16),
        generator_meta=GeneratorMeta(mode="full", degree=0, poly=0, samples=1),
    )
    report = verify_balance(s)
    assert not report.passed
    # the all-zero pattern is over-represented by a factor p^|J|
    assert report.max_relative_deviation == Fraction(3)  # p^2 - 1


def test_reservoir_growth_is_polynomial():
    sizes = {}
    for q in (8, 16, 32):
        s = build_balanced_set(q, 2, (0, 1), epsilon=Fraction(1, 16))
        sizes[q] = s.n_samples
    qs = sorted(sizes)
    exps = [
        (np.log2(sizes[b]) - np.log2(sizes[a])) / (np.log2(b) - np.log2(a))
        for a, b in zip(qs, qs[1:])
    ]
    assert max(exps) <= 2.0 + 1e-9


def test_determinism_and_roundtrip():
    a = build_balanced_set(6, 2, (0, 1), epsilon=Fraction(1, 32))
    b = build_balanced_set(6, 2, (0, 1), epsilon=Fraction(1, 32))
    assert reservoir_to_text(a) == reservoir_to_text(b)
    again = reservoir_from_text(reservoir_to_text(a))
    assert np.array_equal(again.tuples, a.tuples)
    assert again.epsilon == a.epsilon
    assert again.generator_meta == a.generator_meta


def test_default_epsilon_formula():
    assert default_epsilon(8, 2, 2) == Fraction(1, 64)
    assert default_epsilon(100, 2, 2) == Fraction(1, 10000)
