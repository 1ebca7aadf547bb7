"""(q,t)-balanced column reservoirs from a small-bias generator.

The generator is the classic powering construction over GF(2^m): sample
points are pairs (x, y) of field elements, and bit i of the sample is
the GF(2) inner product <x^i, y>.  Every non-empty parity then has bias
at most (k-1)/2^m, so choosing 2^m >= k/eps_bias keeps all parities
below eps_bias.

A (q,t)-balanced set over an alphabet of size p encodes each symbol in
l = ceil(log2 p) bits and asks every marginal on at most t symbol
positions (t*l bits) to be within a relative (1 +- eps) of uniform.
Bit-level bias eps/p^t suffices: a pattern on j <= t*l bits deviates by
at most (2^j - 1) * bias in absolute terms, i.e. by p^t * bias relative
to the uniform weight.

Irreducible polynomials per degree come from the fixed table below so
that reservoir files are byte-identical across runs.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegreeOverflow, EmptyReservoir, SizeOverflow
from .labels import Label

# Degree -> irreducible polynomial over GF(2), bitmask including x^m and 1.
# Standard low-weight (mostly primitive) polynomials; degree 8 is the AES
# polynomial, which is irreducible though not primitive.
IRREDUCIBLE_POLY = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
    9: (1 << 9) | (1 << 4) | 1,
    10: (1 << 10) | (1 << 3) | 1,
    11: (1 << 11) | (1 << 2) | 1,
    12: (1 << 12) | (1 << 6) | (1 << 4) | (1 << 1) | 1,
    13: (1 << 13) | (1 << 4) | (1 << 3) | (1 << 1) | 1,
    14: (1 << 14) | (1 << 10) | (1 << 6) | (1 << 1) | 1,
    15: (1 << 15) | (1 << 1) | 1,
    16: (1 << 16) | (1 << 12) | (1 << 3) | (1 << 1) | 1,
    17: (1 << 17) | (1 << 3) | 1,
    18: (1 << 18) | (1 << 7) | 1,
    19: (1 << 19) | (1 << 5) | (1 << 2) | (1 << 1) | 1,
    20: (1 << 20) | (1 << 3) | 1,
    21: (1 << 21) | (1 << 2) | 1,
    22: (1 << 22) | (1 << 1) | 1,
    23: (1 << 23) | (1 << 5) | 1,
    24: (1 << 24) | (1 << 7) | (1 << 2) | (1 << 1) | 1,
}

DEFAULT_DEGREE_BUDGET = 24
DEFAULT_SAMPLE_BUDGET = 1 << 26
DEFAULT_CHECK_BUDGET = 10_000_000


@dataclass(frozen=True)
class GeneratorMeta:
    mode: str  # "aghp" or "full"
    degree: int
    poly: int
    samples: int


def default_epsilon(q: int, t: int, p: int) -> Fraction:
    """Fixed accuracy level: min(2^-(t*ceil(log2 p) + 2), q^-2)."""
    ell = max(1, (p - 1).bit_length())
    return min(Fraction(1, 2 ** (t * ell + 2)), Fraction(1, q * q))


def _gf_mul_vec(a: np.ndarray, b: np.ndarray, m: int, poly: int) -> np.ndarray:
    """Element-wise product of two GF(2^m) vectors (uint32)."""
    res = np.zeros_like(a)
    aa = a.copy()
    bb = b.copy()
    low = poly & ((1 << m) - 1)
    for _ in range(m):
        res ^= np.where(bb & 1, aa, 0).astype(np.uint32)
        bb = bb >> 1
        carry = (aa >> (m - 1)) & 1
        aa = ((aa << 1) & ((1 << m) - 1)).astype(np.uint32)
        aa ^= np.where(carry.astype(bool), np.uint32(low), np.uint32(0))
    return res


def build_eps_biased_space(
    k_bits: int,
    epsilon: Fraction,
    degree_budget: int = DEFAULT_DEGREE_BUDGET,
    sample_budget: int = DEFAULT_SAMPLE_BUDGET,
) -> tuple[np.ndarray, GeneratorMeta]:
    """All 2^(2m) AGHP sample strings of length k_bits with bias <= epsilon.

    Returns (samples, meta) with samples an (N, k_bits) uint8 array in
    (x, y)-lexicographic order.
    """
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    if k_bits < 1:
        raise ValueError("k_bits must be >= 1")
    # smallest m with 2^m >= k_bits / epsilon
    m = 2
    while (1 << m) * epsilon.numerator < k_bits * epsilon.denominator:
        m += 1
    if m > degree_budget:
        raise DegreeOverflow(f"needs GF(2^{m}); degree budget is {degree_budget}")
    n_samples = 1 << (2 * m)
    if n_samples > sample_budget or n_samples * k_bits > (sample_budget << 5):
        raise SizeOverflow(
            f"AGHP space has {n_samples} samples of {k_bits} bits; over budget"
        )
    poly = IRREDUCIBLE_POLY[m]
    size = 1 << m
    xs = np.arange(size, dtype=np.uint32)
    ys = np.arange(size, dtype=np.uint32)
    out = np.empty((n_samples, k_bits), dtype=np.uint8)
    power = np.ones(size, dtype=np.uint32)  # x^0
    for i in range(k_bits):
        if i > 0:
            power = _gf_mul_vec(power, xs, m, poly)
        inner = np.bitwise_count(power[:, None] & ys[None, :]).astype(np.uint8) & 1
        out[:, i] = inner.reshape(-1)
    return out, GeneratorMeta(mode="aghp", degree=m, poly=poly, samples=n_samples)


@dataclass(frozen=True)
class BalancedColumnSet:
    """The (q,t)-balanced multiset S_{q,t}(C) with provenance.

    ``tuples`` holds one row per sample (multiplicities included) as
    indices into ``alphabet``; ``epsilon`` is the target accuracy and
    ``realized_epsilon`` the measured one when decoding dropped tuples.
    """

    q: int
    t: int
    alphabet: tuple[Label, ...]
    epsilon: Fraction
    tuples: np.ndarray
    generator_meta: GeneratorMeta
    realized_epsilon: Fraction | None = None

    def __post_init__(self):
        if self.tuples.ndim != 2 or self.tuples.shape[1] != self.q:
            raise ValueError("tuples must be an (N, q) array")
        if self.tuples.shape[0] == 0:
            raise EmptyReservoir("reservoir has no tuples")
        if self.tuples.size and int(self.tuples.max()) >= len(self.alphabet):
            raise ValueError("tuple symbol out of alphabet range")
        self.tuples.setflags(write=False)

    @property
    def p(self) -> int:
        return len(self.alphabet)

    @property
    def n_samples(self) -> int:
        return int(self.tuples.shape[0])

    def size_bound(self) -> int:
        """Instantiated AGHP size bound 4*(q*l*p^t/eps)^2 (1 for full mode)."""
        if self.generator_meta.mode == "full":
            return self.p**self.q
        ell = max(1, (self.p - 1).bit_length())
        ratio = Fraction(self.q * ell * self.p**self.t, 1) / self.epsilon
        return math.ceil(4 * ratio * ratio)

    def distinct_tuples(self) -> np.ndarray:
        """Distinct tuples in first-occurrence order."""
        _, idx = np.unique(self.tuples, axis=0, return_index=True)
        return self.tuples[np.sort(idx)]

    def tuple_multiplicities(self) -> dict[tuple[int, ...], int]:
        uniq, counts = np.unique(self.tuples, axis=0, return_counts=True)
        return {tuple(map(int, row)): int(c) for row, c in zip(uniq, counts)}

    def label_tuple(self, index_row) -> tuple[Label, ...]:
        return tuple(self.alphabet[i] for i in index_row)


def build_balanced_set(
    q: int,
    t: int,
    alphabet: Sequence[Label],
    epsilon: Fraction | None = None,
    full_product: bool = False,
    degree_budget: int = DEFAULT_DEGREE_BUDGET,
    sample_budget: int = DEFAULT_SAMPLE_BUDGET,
) -> BalancedColumnSet:
    """Construct S_{q,t}(C); AGHP-backed unless full_product is set."""
    alphabet = tuple(alphabet)
    p = len(alphabet)
    if p < 2:
        raise ValueError("alphabet needs at least two symbols")
    if not (1 <= t <= q):
        raise ValueError("need q >= t >= 1")
    if full_product:
        if p**q > 1 << 16:
            raise SizeOverflow(f"full product has {p**q} tuples; over 2^16")
        rows = np.array(
            list(itertools.product(range(p), repeat=q)), dtype=np.uint16
        )
        return BalancedColumnSet(
            q=q,
            t=t,
            alphabet=alphabet,
            epsilon=Fraction(0),
            tuples=rows,
            generator_meta=GeneratorMeta(mode="full", degree=0, poly=0, samples=p**q),
            realized_epsilon=Fraction(0),
        )
    if epsilon is None:
        epsilon = default_epsilon(q, t, p)
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    ell = max(1, (p - 1).bit_length())
    bias = epsilon / p**t
    samples, meta = build_eps_biased_space(
        q * ell, bias, degree_budget=degree_budget, sample_budget=sample_budget
    )
    # block-wise decode, big-endian bits within each block
    weights = (1 << np.arange(ell - 1, -1, -1, dtype=np.int64)).astype(np.int64)
    blocks = samples.reshape(samples.shape[0], q, ell).astype(np.int64)
    codes = (blocks * weights).sum(axis=2)
    keep = (codes < p).all(axis=1)
    kept = codes[keep].astype(np.uint16)
    if kept.shape[0] == 0:
        raise EmptyReservoir("every sample decoded to an invalid codeword")
    s = BalancedColumnSet(
        q=q,
        t=t,
        alphabet=alphabet,
        epsilon=epsilon,
        tuples=kept,
        generator_meta=meta,
        realized_epsilon=epsilon if p == (1 << ell) else None,
    )
    if p != (1 << ell):
        # dropping invalid codewords perturbs the marginals; measure them
        report = verify_balance(s)
        object.__setattr__(s, "realized_epsilon", report.max_relative_deviation)
    return s


@dataclass(frozen=True)
class ProjectionStat:
    size: int
    worst_index_set: tuple[int, ...]
    worst_pattern: tuple[int, ...]
    max_relative_deviation: Fraction


@dataclass(frozen=True)
class BalanceReport:
    epsilon: Fraction
    exhaustive: bool
    per_size: tuple[ProjectionStat, ...]
    max_relative_deviation: Fraction
    passed: bool


def verify_balance(
    s: BalancedColumnSet,
    check_budget: int = DEFAULT_CHECK_BUDGET,
    sample_index_sets: int = 64,
    seed: int = 0,
) -> BalanceReport:
    """Empirical check of the t-projection balance guarantee.

    Exhaustive over all index sets J with |J| <= t when the total pattern
    count fits the budget; otherwise a seeded sample of index sets per
    size (recorded as exhaustive=False).
    """
    p = s.p
    n = s.n_samples
    total = sum(math.comb(s.q, size) * p**size for size in range(1, s.t + 1))
    exhaustive = total <= check_budget
    rng = random.Random(seed)
    per_size = []
    overall = Fraction(0)
    data = s.tuples
    for size in range(1, s.t + 1):
        if exhaustive:
            index_sets = itertools.combinations(range(s.q), size)
        else:
            universe = list(itertools.islice(itertools.combinations(range(s.q), size), 100_000))
            k = min(sample_index_sets, len(universe))
            index_sets = rng.sample(universe, k)
        worst = None
        for js in index_sets:
            codes = np.zeros(n, dtype=np.int64)
            for j in js:
                codes = codes * p + data[:, j].astype(np.int64)
            counts = np.bincount(codes, minlength=p**size)
            target = p**size
            for pattern_code in range(target):
                dev = Fraction(abs(int(counts[pattern_code]) * target - n), n)
                if worst is None or dev > worst[0]:
                    pattern = []
                    c = pattern_code
                    for _ in range(size):
                        pattern.append(c % p)
                        c //= p
                    worst = (dev, tuple(js), tuple(reversed(pattern)))
        per_size.append(
            ProjectionStat(
                size=size,
                worst_index_set=worst[1],
                worst_pattern=worst[2],
                max_relative_deviation=worst[0],
            )
        )
        overall = max(overall, worst[0])
    return BalanceReport(
        epsilon=s.epsilon,
        exhaustive=exhaustive,
        per_size=tuple(per_size),
        max_relative_deviation=overall,
        passed=overall <= s.epsilon,
    )


# ---------------------------------------------------------------------------
# reservoir file format

def reservoir_to_text(s: BalancedColumnSet) -> str:
    head = f"{s.q} {s.t} {s.p} {s.epsilon.numerator}/{s.epsilon.denominator} {s.n_samples}"
    meta = s.generator_meta
    realized = (
        f"{s.realized_epsilon.numerator}/{s.realized_epsilon.denominator}"
        if s.realized_epsilon is not None
        else "-"
    )
    meta_line = f"mode={meta.mode} m={meta.degree} poly={meta.poly} samples={meta.samples} realized={realized}"
    body = "\n".join(" ".join(map(str, row)) for row in s.tuples.tolist())
    return f"{head}\n{meta_line}\n{body}\n"


def reservoir_from_text(text: str) -> BalancedColumnSet:
    lines = text.splitlines()
    q, t, p, eps, n = lines[0].split()
    q, t, p, n = int(q), int(t), int(p), int(n)
    num, den = map(int, eps.split("/"))
    fields = dict(item.split("=", 1) for item in lines[1].split())
    realized = fields.get("realized", "-")
    rows = np.array(
        [list(map(int, line.split())) for line in lines[2 : 2 + n]], dtype=np.uint16
    )
    return BalancedColumnSet(
        q=q,
        t=t,
        alphabet=tuple(range(p)),
        epsilon=Fraction(num, den),
        tuples=rows,
        generator_meta=GeneratorMeta(
            mode=fields["mode"],
            degree=int(fields["m"]),
            poly=int(fields["poly"]),
            samples=int(fields["samples"]),
        ),
        realized_epsilon=None
        if realized == "-"
        else Fraction(*map(int, realized.split("/"))),
    )
