"""Bracket families, equipartition certificates, and the two constructive
lemmas on relaxed interlaces (block balancing, relaxed-to-classical).

A bracket family over an m x n matrix M with order p and densities
(x, y) consists of every extraction of the p-fold interlace of M to an
exact T-equipartitioned row set (T = ceil(m*x), exactly T rows per
block) and a column set of exactly ceil(n^p * y) interlaced columns.
Family complexity is the minimum member complexity; sampling mode can
only overestimate it and is therefore never used in lemma assertions.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .errors import BindingViolation, DensityTooLow, FamilyTooLarge
from .interlace import DEFAULT_CELL_BUDGET, k_fold_interlace
from .labels import Label, label_key
from .matrix import BooleanMatrix, extract
from .reservoir import BalancedColumnSet
from .solver import Solver


def ceil_frac(value: Fraction) -> int:
    return -((-value.numerator) // value.denominator)


def ceil_mul_pow(base: int, y: Fraction, exponent: Fraction = Fraction(1)) -> int:
    """Exact ceil(base * y^exponent) for integer base >= 0 and rational y, exponent >= 0.

    Computed through integer arithmetic only: k is the least integer with
    k^v * y_den^u >= base^v * y_num^u where exponent = u/v.
    """
    if base == 0:
        return 0
    u, v = exponent.numerator, exponent.denominator
    if u == 0:
        return base
    lhs_num = base**v * y.numerator**u
    lhs_den = y.denominator**u
    # binary search the least k with k^v >= lhs_num / lhs_den
    lo, hi = 0, 1
    while hi**v * lhs_den < lhs_num:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**v * lhs_den >= lhs_num:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class Equipartition:
    """A (Q,T)-quota certificate over an interlaced row universe [k] x R."""

    k: int
    base_rows: tuple[Label, ...]
    q_blocks: frozenset[int]
    quota: int
    selection: frozenset[tuple[int, Label]]

    def __post_init__(self):
        base = set(self.base_rows)
        for block, row in self.selection:
            if not (1 <= block <= self.k) or row not in base:
                raise ValueError(f"selection entry ({block}, {row!r}) outside universe")
        for q in self.q_blocks:
            if self.block_count(q) < self.quota:
                raise ValueError(f"block {q} holds fewer than {self.quota} rows")

    def block_count(self, block: int) -> int:
        return sum(1 for b, _ in self.selection if b == block)

    @property
    def exact(self) -> bool:
        return all(self.block_count(q) == self.quota for q in self.q_blocks)


@dataclass(frozen=True)
class BracketSpec:
    matrix: BooleanMatrix
    p: int
    x: Fraction
    y: Fraction

    def __post_init__(self):
        if self.p < 1:
            raise BindingViolation("bracket order p must be >= 1")
        if not (0 < self.x <= 1) or not (0 < self.y <= 1):
            raise BindingViolation("densities x, y must lie in (0, 1]")

    @property
    def row_quota(self) -> int:
        return ceil_frac(self.matrix.n_rows * self.x)

    @property
    def col_quota(self) -> int:
        return ceil_mul_pow(self.matrix.n_cols**self.p, self.y)

    def member_count(self) -> int:
        m = self.matrix.n_rows
        n = self.matrix.n_cols
        return math.comb(m, self.row_quota) ** self.p * math.comb(
            n**self.p, self.col_quota
        )


def _member_count(spec: BracketSpec, col_quota: int) -> int:
    m = spec.matrix.n_rows
    n = spec.matrix.n_cols
    return math.comb(m, spec.row_quota) ** spec.p * math.comb(n**spec.p, col_quota)


def enumerate_members(
    spec: BracketSpec,
    cap: int = 200_000,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    col_quota: Optional[int] = None,
) -> Iterator[BooleanMatrix]:
    """Yield every family member exactly once, deterministically ordered.

    ``col_quota`` overrides the spec's quota; the harness uses it for
    densities of the form y^(u/v) that are not rational themselves.
    """
    quota = spec.col_quota if col_quota is None else col_quota
    count = _member_count(spec, quota)
    if count > cap:
        raise FamilyTooLarge(count, cap)
    inter = k_fold_interlace(spec.matrix, spec.p, cell_budget=cell_budget)
    t = spec.row_quota
    block_choices = list(itertools.combinations(spec.matrix.rows, t))
    for blocks in itertools.product(block_choices, repeat=spec.p):
        row_sel = [(i + 1, r) for i, chosen in enumerate(blocks) for r in chosen]
        for col_sel in itertools.combinations(inter.cols, quota):
            yield extract(inter, row_sel, col_sel)


@dataclass(frozen=True)
class FamilyComplexityResult:
    value: int
    exact: bool
    members_examined: int
    witness: BooleanMatrix


def family_complexity(
    spec: BracketSpec,
    cap: int = 200_000,
    samples: int = 0,
    solver: Optional[Solver] = None,
    seed: int = 0,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    col_quota: Optional[int] = None,
) -> FamilyComplexityResult:
    """Minimum member complexity, exact when enumeration fits the cap.

    With samples > 0 an over-cap family is sampled instead; the sampled
    value is an upper bound on the true minimum and is flagged exact=False.
    """
    solver = solver or Solver()
    quota = spec.col_quota if col_quota is None else col_quota
    count = _member_count(spec, quota)
    best = None
    witness = None
    examined = 0
    seen: dict = {}
    if count <= cap:
        for member in enumerate_members(
            spec, cap=cap, cell_budget=cell_budget, col_quota=quota
        ):
            examined += 1
            key = solver._canon_of(solver._state_of(member))
            val = seen.get(key)
            if val is None:
                val = solver.solve_exact(member).value
                seen[key] = val
            if best is None or val < best:
                best = val
                witness = member
                if best == 0:
                    break
        return FamilyComplexityResult(best, True, examined, witness)
    if samples <= 0:
        raise FamilyTooLarge(count, cap)
    rng = random.Random(seed)
    inter = k_fold_interlace(spec.matrix, spec.p, cell_budget=cell_budget)
    t = spec.row_quota
    for _ in range(samples):
        row_sel = []
        for i in range(1, spec.p + 1):
            chosen = rng.sample(list(spec.matrix.rows), t)
            row_sel.extend((i, r) for r in chosen)
        col_sel = rng.sample(list(inter.cols), quota)
        member = extract(inter, row_sel, col_sel)
        examined += 1
        val = solver.solve_exact(member).value
        if best is None or val < best:
            best = val
            witness = member
    return FamilyComplexityResult(best, False, examined, witness)


def block_balance(
    selection: Sequence[tuple[int, Label]],
    q: int,
    m: int,
    x: Fraction,
) -> tuple[tuple[int, ...], frozenset]:
    """Trim an arbitrary row selection of [q] x R to full blocks.

    Returns (J, selection restricted to J) where J consists of exactly
    k = ceil(q*(beta - x)/(1 - x)) full blocks (quota T = ceil(m*x)),
    beta being the selection density.  Below density x the only
    T-equipartitioned sub-selection is empty.
    """
    if not (0 < x <= 1):
        raise ValueError("x must lie in (0, 1]")
    if q < 1 or m < 1:
        raise ValueError("need q >= 1 and m >= 1")
    selection = set(selection)
    for block, _ in selection:
        if not (1 <= block <= q):
            raise ValueError(f"block {block} outside [1, {q}]")
    t_quota = ceil_frac(m * x)
    beta = Fraction(len(selection), q * m)
    if beta < x:
        return ((), frozenset())
    if x == 1:
        k = q  # limit of q*(beta-x)/(1-x) as beta = x = 1
    else:
        k = ceil_frac(q * (beta - x) / (1 - x))
    counts: dict[int, int] = {}
    for block, _ in selection:
        counts[block] = counts.get(block, 0) + 1
    full_blocks = sorted(b for b, c in counts.items() if c >= t_quota)
    if len(full_blocks) < k:
        raise AssertionError("counting bound violated: fewer full blocks than k")
    j_set = tuple(full_blocks[:k])
    kept = frozenset((b, r) for (b, r) in selection if b in j_set)
    for b in j_set:
        assert sum(1 for bb, _ in kept if bb == b) >= t_quota
    return (j_set, kept)


@dataclass(frozen=True)
class RelaxedToClassicalResult:
    """Certificate-carrying output of the relaxed-to-classical extraction."""

    member: BooleanMatrix
    row_selection: tuple  # (block, base row) pairs actually kept, trimmed
    col_representatives: tuple  # reservoir tuples kept, one per pattern
    distinct_patterns: int
    y_prime: Fraction
    certificate_ok: bool


def relaxed_to_classical(
    n_matrix: BooleanMatrix,
    s: BalancedColumnSet,
    q_blocks: Sequence[int],
    r_prime: Equipartition,
    c_prime_indices: Sequence[int],
    y: Fraction,
    base: BooleanMatrix,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> RelaxedToClassicalResult:
    """Extract a classical bracket-family member from a relaxed interlace.

    ``n_matrix`` must be relaxed_interlace(base, s.q, s); ``r_prime`` a
    (Q,T)-equipartition over its rows; ``c_prime_indices`` a sub-multiset
    of reservoir sample indices with |C'|/|S| > y.  Step 1 trims each
    block of Q to its first T rows by label order; step 2 projects the
    chosen columns onto Q and keeps the first representative of each
    distinct pattern.  The certificate re-checks the produced member
    entry by entry against extract(<base>^t, ., .).
    """
    q_sorted = tuple(sorted(q_blocks))
    t = len(q_sorted)
    if frozenset(q_sorted) != frozenset(r_prime.q_blocks):
        raise ValueError("Q and the equipartition's block set differ")
    if not c_prime_indices:
        raise ValueError("C' must be non-empty")
    if Fraction(len(c_prime_indices), s.n_samples) <= y:
        raise ValueError("need |C'|/|S| > y")
    eps = s.realized_epsilon if s.realized_epsilon is not None else s.epsilon
    y_prime = y / (1 + eps)

    # Step 1: exact (Q,T)-equipartition, first T rows per block by label order
    t_quota = r_prime.quota
    kept_rows = []
    for block in q_sorted:
        in_block = sorted(
            (r for b, r in r_prime.selection if b == block), key=label_key
        )
        kept_rows.extend((block, r) for r in in_block[:t_quota])

    # Step 2: project columns onto Q, one representative per pattern
    tuples = s.tuples
    projected: dict[tuple, tuple] = {}
    order = sorted(
        set(int(i) for i in c_prime_indices),
        key=lambda i: tuple(int(v) for v in tuples[i]),
    )
    for i in order:
        full = tuple(int(v) for v in tuples[i])
        pattern = tuple(full[j - 1] for j in q_sorted)
        if pattern not in projected:
            projected[pattern] = full
    n_cols_base = base.n_cols
    quota = ceil_mul_pow(n_cols_base**t, y_prime)
    if len(projected) < quota:
        raise DensityTooLow(
            f"{len(projected)} distinct patterns survive; quota is {quota}"
        )
    patterns = sorted(projected)[:quota]

    # assemble the member over classical interlace labels
    kept_sorted = sorted(kept_rows, key=lambda br: (q_sorted.index(br[0]), label_key(br[1])))
    member_rows = [(q_sorted.index(block) + 1, r) for block, r in kept_sorted]
    member_cols = [tuple(s.alphabet[v] for v in pat) for pat in patterns]
    base_row_index = {r: i for i, r in enumerate(base.rows)}
    base_col_index = {c: j for j, c in enumerate(base.cols)}
    bits = []
    for block, r in kept_sorted:
        slot = q_sorted.index(block)
        row_bits = []
        for pat in patterns:
            symbol = s.alphabet[pat[slot]]
            row_bits.append(int(base.bits[base_row_index[r], base_col_index[symbol]]))
        bits.append(row_bits)
    member = BooleanMatrix(member_rows, member_cols, bits)

    # certificate: compare entry by entry with the classical interlace
    classical = k_fold_interlace(base, t, cell_budget=cell_budget)
    reference = extract(classical, member_rows, member_cols)
    ok = member == reference
    # and against the relaxed matrix itself on the chosen representatives
    if ok:
        for (block, r), mrow in zip(kept_sorted, member_rows):
            for pat, mcol in zip(patterns, member_cols):
                rep = projected[pat]
                rep_label = tuple(s.alphabet[v] for v in rep)
                if n_matrix.entry((block, r), rep_label) != member.entry(mrow, mcol):
                    ok = False
                    break
            if not ok:
                break
    return RelaxedToClassicalResult(
        member=member,
        row_selection=tuple(kept_sorted),
        col_representatives=tuple(tuple(s.alphabet[v] for v in projected[p]) for p in patterns),
        distinct_patterns=len(projected),
        y_prime=y_prime,
        certificate_ok=ok,
    )
