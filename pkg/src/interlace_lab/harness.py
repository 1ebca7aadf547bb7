"""Named, parameterized pass/fail checks for the finite-checkable lemmas.

Every check computes both sides of its inequality in exact mode (full
family enumeration; FamilyTooLarge propagates) and reports them.
Lemmas with premises pass vacuously when a premise fails; vacuous
passes are flagged as such in the result.  A check never reports
"fail" from sampled values: sampling is simply not used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .brackets import BracketSpec, ceil_frac, family_complexity
from .errors import BindingViolation
from .interlace import k_fold_interlace
from .matrix import BooleanMatrix
from .solver import Solver

# rational over-approximation of the robustness bound 1/sqrt(2) - 1/2
MAX_DELTA = Fraction(207, 1000)

NAMED_LEMMAS = (
    "monotonicity",
    "projection",
    "partition",
    "new_partition",
    "hard_seed",
    "column_partition",
    "transpose",
    "robust9_16",
)


@dataclass
class LemmaCheckResult:
    lemma: str
    binding: dict
    left: Optional[object]
    right: Optional[object]
    left_exact: bool = True
    right_exact: bool = True
    verdict: str = "pass"  # pass | fail | not-exact
    vacuous: bool = False
    premises: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def machine_line(self) -> str:
        return f"LEMMA {self.lemma} {self.verdict} {self.left} {self.right}"


def _fc(matrix, p, x, y, cap, solver, cell_budget):
    spec = BracketSpec(matrix, p, x, y)
    return family_complexity(spec, cap=cap, solver=solver, cell_budget=cell_budget)


def _clamp1(v: Fraction) -> Fraction:
    return v if v < 1 else Fraction(1)


def check_robustness(
    m: BooleanMatrix,
    delta: Fraction,
    b: int,
    cap: int = 200_000,
    solver: Optional[Solver] = None,
    cell_budget: int = 1 << 26,
) -> LemmaCheckResult:
    """Does m satisfy the (delta, b)-robustness conditions?"""
    if not (0 < delta <= MAX_DELTA):
        raise BindingViolation(f"delta must lie in (0, {MAX_DELTA}]")
    if b < 0:
        raise BindingViolation("robustness depth b must be >= 0")
    solver = solver or Solver()
    d_m = solver.solve_exact(m).value
    cond1 = d_m >= 1
    fam = _fc(m, 1, Fraction(1, 2**b), Fraction(1, 2) + delta, cap, solver, cell_budget)
    cond2 = fam.value >= d_m
    result = LemmaCheckResult(
        lemma="robustness",
        binding={"delta": delta, "b": b},
        left=fam.value,
        right=d_m,
        verdict="pass" if (cond1 and cond2) else "fail",
        premises=[("D(M) >= 1", cond1, d_m)],
        details={"condition1": cond1, "condition2": cond2},
    )
    return result


def check_double_interlace(
    m: BooleanMatrix,
    delta: Fraction,
    b: int,
    cap: int = 200_000,
    solver: Optional[Solver] = None,
    cell_budget: int = 1 << 26,
) -> LemmaCheckResult:
    """Conditions 3-5 as consequences of robustness (implication semantics).

    Needs b >= 1 so that the Condition-5 row density 2^(1-b) stays in
    (0, 1].  The conditions are asserted only under the robustness
    premise; a non-robust m yields a vacuous pass with sides reported.
    """
    if b < 1:
        raise BindingViolation("double-interlace check needs b >= 1")
    solver = solver or Solver()
    robust = check_robustness(m, delta, b, cap=cap, solver=solver, cell_budget=cell_budget)
    d_m = robust.right
    x = Fraction(1, 2**b)
    sub = {}
    c3 = _fc(m, 1, x, Fraction(1, 8) + delta / 4, cap, solver, cell_budget)
    sub["condition3"] = (c3.value, d_m - 2, c3.value >= d_m - 2)
    c4 = _fc(m, 1, x, Fraction(1, 4) + delta / 2, cap, solver, cell_budget)
    sub["condition4"] = (c4.value, d_m - 1, c4.value >= d_m - 1)
    c5 = _fc(
        m, 2, _clamp1(2 * x), (Fraction(1, 2) + delta) ** 2, cap, solver, cell_budget
    )
    sub["condition5"] = (c5.value, d_m + 1, c5.value >= d_m + 1)
    premise = robust.verdict == "pass"
    holds = all(ok for (_, _, ok) in sub.values())
    return LemmaCheckResult(
        lemma="double_interlace",
        binding={"delta": delta, "b": b},
        left=tuple(v[0] for v in sub.values()),
        right=tuple(v[1] for v in sub.values()),
        verdict="pass" if (not premise or holds) else "fail",
        vacuous=not premise,
        premises=[("M is (delta,b)-robust", premise, (robust.left, robust.right))],
        details=sub,
    )


def check_named_inequality(
    name: str,
    binding: dict,
    cap: int = 200_000,
    solver: Optional[Solver] = None,
    cell_budget: int = 1 << 26,
) -> LemmaCheckResult:
    if name not in NAMED_LEMMAS:
        raise BindingViolation(f"unknown lemma {name!r}; choose from {NAMED_LEMMAS}")
    solver = solver or Solver()
    fn = {
        "monotonicity": _check_monotonicity,
        "projection": _check_projection,
        "partition": _check_partition,
        "new_partition": _check_new_partition,
        "hard_seed": _check_hard_seed,
        "column_partition": _check_column_partition,
        "transpose": _check_transpose,
        "robust9_16": _check_robust9_16,
    }[name]
    return fn(binding, cap, solver, cell_budget)


def _need(binding, *keys):
    missing = [k for k in keys if k not in binding]
    if missing:
        raise BindingViolation(f"binding misses parameters {missing}")
    return [binding[k] for k in keys]


def _check_monotonicity(binding, cap, solver, cell_budget):
    m, p, x, y, p2, x2, y2 = _need(binding, "matrix", "p", "x", "y", "p2", "x2", "y2")
    if not (p2 <= p and x2 <= x and y2 <= y):
        raise BindingViolation("need p' <= p, x' <= x, y' <= y")
    small = _fc(m, p2, x2, y2, cap, solver, cell_budget)
    big = _fc(m, p, x, y, cap, solver, cell_budget)
    return LemmaCheckResult(
        lemma="monotonicity",
        binding=binding,
        left=small.value,
        right=big.value,
        verdict="pass" if small.value <= big.value else "fail",
    )


def _check_projection(binding, cap, solver, cell_budget):
    m, p, x, y, l = _need(binding, "matrix", "p", "x", "y", "l")
    if not (1 <= l <= p):
        raise BindingViolation("need 1 <= l <= p")
    big = _fc(m, p, x, y, cap, solver, cell_budget)
    small = _fc_pow(m, l, x, y, Fraction(l, p), cap, solver, cell_budget)
    return LemmaCheckResult(
        lemma="projection",
        binding=binding,
        left=big.value,
        right=small.value,
        verdict="pass" if big.value >= small.value else "fail",
    )


def _fc_pow(m, p, x, y, exponent, cap, solver, cell_budget):
    """family_complexity over column density y**exponent via an exact quota."""
    from .brackets import ceil_mul_pow

    quota = ceil_mul_pow(m.n_cols**p, y, exponent)
    spec = BracketSpec(m, p, x, Fraction(1))
    return family_complexity(
        spec, cap=cap, solver=solver, cell_budget=cell_budget, col_quota=quota
    )


def _check_partition(binding, cap, solver, cell_budget):
    m, p, x, y, dlt, tau = _need(binding, "matrix", "p", "x", "y", "delta", "tau")
    if dlt not in (0, 1):
        raise BindingViolation("delta must be 0 or 1")
    if not (0 < x <= Fraction(1, 2)):
        raise BindingViolation("need 0 < x <= 1/2")
    if not (0 <= tau <= 1):
        raise BindingViolation("need 0 <= tau <= 1")
    p_shrunk = p * (1 - tau) + 1
    if p_shrunk.denominator != 1:
        raise BindingViolation("p*(1-tau)+1 must be an integer at desk scale")
    p_shrunk = int(p_shrunk)
    premise = _fc(m, 2 * p, 2 * x, y / 4, cap, solver, cell_budget)
    premise_holds = premise.value >= 1
    lhs_t0 = _fc(m, 2 * p + dlt, 2 * x, y, cap, solver, cell_budget)
    rhs_t0 = _fc(m, p + dlt, x, y, cap, solver, cell_budget)
    ok_t0 = lhs_t0.value >= 1 + rhs_t0.value
    lhs_d0 = _fc(m, 2 * p, 2 * x, y, cap, solver, cell_budget)
    rhs_a = _fc_pow(m, p, x, y, Fraction(1, 1 + tau), cap, solver, cell_budget)
    rhs_b = _fc_pow(m, p_shrunk, x, y, Fraction(tau, 1 + tau) if tau else Fraction(0), cap, solver, cell_budget)
    ok_d0 = lhs_d0.value >= 1 + min(rhs_a.value, rhs_b.value)
    holds = ok_t0 and ok_d0
    return LemmaCheckResult(
        lemma="partition",
        binding=binding,
        left=(lhs_t0.value, lhs_d0.value),
        right=(1 + rhs_t0.value, 1 + min(rhs_a.value, rhs_b.value)),
        verdict="pass" if (not premise_holds or holds) else "fail",
        vacuous=not premise_holds,
        premises=[("comp [M]^{2p}_{2x,y/4} >= 1", premise_holds, premise.value)],
    )


def _check_new_partition(binding, cap, solver, cell_budget):
    m, p, x, y, k, s_par, rho = _need(binding, "matrix", "p", "x", "y", "k", "s", "rho")
    rho = Fraction(rho)
    if not (s_par <= k):
        raise BindingViolation("need s <= k")
    if not (0 < x <= Fraction(1, 2**k)):
        raise BindingViolation("need 0 < x <= 2^-k")
    if not rho > 2:
        raise BindingViolation("need rho > 2")
    if (rho - 1) ** k > rho ** (k - s_par):
        raise BindingViolation("need (rho-1)^k <= rho^(k-s)")
    p_big = 2**k * ((rho - 1) / (rho - 2)) ** s_par * p
    if isinstance(p_big, Fraction):
        if p_big.denominator != 1:
            raise BindingViolation("2^k ((rho-1)/(rho-2))^s p must be an integer")
        p_big = int(p_big)
    premise = _fc(m, p, x, y / 4, cap, solver, cell_budget)
    premise_holds = premise.value >= 1
    rho_pow = Fraction(rho) ** s_par
    lhs = _fc_pow(m, p_big, _clamp1(2**k * x), y, rho_pow, cap, solver, cell_budget)
    rhs = _fc(m, p, x, y, cap, solver, cell_budget)
    holds = lhs.value >= k + rhs.value
    return LemmaCheckResult(
        lemma="new_partition",
        binding=binding,
        left=lhs.value,
        right=k + rhs.value,
        verdict="pass" if (not premise_holds or holds) else "fail",
        vacuous=not premise_holds,
        premises=[("comp [M]^p_{x,y/4} >= 1", premise_holds, premise.value)],
    )


def _is_phi_like(m: BooleanMatrix) -> bool:
    return m.n_rows == 1 and m.n_cols == 2 and sorted(map(int, m.bits[0])) == [0, 1]


def _check_hard_seed(binding, cap, solver, cell_budget):
    m, p, x, y = _need(binding, "matrix", "p", "x", "y")
    if not _is_phi_like(m):
        raise BindingViolation("hard_seed is stated for the 1x2 seed matrix")
    # exact log2 y needs y a power of two
    num, den = y.numerator, y.denominator
    if num & (num - 1) or den & (den - 1):
        raise BindingViolation("y must be a power of two for an exact bound")
    log_y = num.bit_length() - den.bit_length()
    z = p + log_y
    rhs = 0 if z <= 0 else math.ceil(math.log2(z)) + 1
    fam = _fc(m, p, x, y, cap, solver, cell_budget)
    return LemmaCheckResult(
        lemma="hard_seed",
        binding=binding,
        left=fam.value,
        right=rhs,
        verdict="pass" if fam.value >= rhs else "fail",
    )


def _check_column_partition(binding, cap, solver, cell_budget):
    m, p, x, y, k, mm = _need(binding, "matrix", "p", "x", "y", "k", "m")
    if k < 0 or mm < 0:
        raise BindingViolation("need k, m >= 0")
    small = _fc(m, p, x, y, cap, solver, cell_budget)
    big = _fc(m, p, _clamp1(2**k * x), _clamp1(2**mm * y), cap, solver, cell_budget)
    return LemmaCheckResult(
        lemma="column_partition",
        binding=binding,
        left=k + mm + small.value,
        right=big.value,
        verdict="pass" if k + mm + small.value >= big.value else "fail",
    )


def _check_transpose(binding, cap, solver, cell_budget):
    from .matrix import transpose as _t

    m, x, y = _need(binding, "matrix", "x", "y")
    a = _fc(m, 1, x, y, cap, solver, cell_budget)
    b = _fc(_t(m), 1, y, x, cap, solver, cell_budget)
    return LemmaCheckResult(
        lemma="transpose",
        binding=binding,
        left=a.value,
        right=b.value,
        verdict="pass" if a.value == b.value else "fail",
    )


def _check_robust9_16(binding, cap, solver, cell_budget):
    m, delta, b, p = _need(binding, "matrix", "delta", "b", "p")
    if p not in (0, 1):
        raise BindingViolation("robust9_16 check is capped to p in {0, 1}")
    if b < p + 1:
        raise BindingViolation("need b >= p+1 so the row density stays in (0,1]")
    robust = check_robustness(m, delta, b, cap=cap, solver=solver, cell_budget=cell_budget)
    d_m = robust.right
    premise = robust.verdict == "pass" and 3 <= d_m <= b
    lhs = _fc(
        m, 2**p + 1, Fraction(2 ** (p + 1), 2**b), Fraction(1, 2) + delta,
        cap, solver, cell_budget,
    )
    mid = d_m + p + 1
    inter = k_fold_interlace(m, 2 ** (p + 1), cell_budget=cell_budget)
    rhs = solver.solve_exact(inter).value
    holds = lhs.value >= mid >= rhs
    return LemmaCheckResult(
        lemma="robust9_16",
        binding=binding,
        left=lhs.value,
        right=(mid, rhs),
        verdict="pass" if (not premise or holds) else "fail",
        vacuous=not premise,
        premises=[("robust and 3 <= D(M) <= b", premise, d_m)],
    )
