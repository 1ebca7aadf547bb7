"""The acceptance suite: one runnable check per criterion.

Shared by tests/test_acceptance.py and the CLI selftest command.  Every
check is deterministic (fixed seeds) and records pass/fail, a detail
string, and its wall time.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

from .brackets import (
    BracketSpec,
    Equipartition,
    block_balance,
    ceil_frac,
    ceil_mul_pow,
    family_complexity,
    relaxed_to_classical,
)
from .harness import check_named_inequality
from .interlace import k_fold_interlace, relaxed_interlace
from .matrix import BooleanMatrix, canonicalize, extract, phi
from .reduction import (
    VbpInstance,
    extract_gap_submatrix,
    measure_growth,
    reduce_instance,
)
from .reservoir import build_balanced_set, verify_balance
from .solver import Solver, naive_reference, verify_protocol

POOL_SEED = 20250811


@dataclass
class CriterionResult:
    number: int
    description: str
    passed: bool
    detail: str
    seconds: float


def _result(number, description, passed, detail, t0):
    return CriterionResult(
        number=number,
        description=description,
        passed=passed,
        detail=detail,
        seconds=time.perf_counter() - t0,
    )


def random_pool(count: int = 200, seed: int = POOL_SEED):
    """Fixed-seed pool of matrices within the naive-oracle guard."""
    rng = random.Random(seed)
    pool = []
    for _ in range(count):
        m = rng.randint(1, 4)
        n = rng.randint(1, 8)
        bits = [[rng.randint(0, 1) for _ in range(n)] for _ in range(m)]
        pool.append(BooleanMatrix(list(range(1, m + 1)), list(range(1, n + 1)), bits))
    return pool


def criterion_1(solver: Solver, cert_log: list) -> CriterionResult:
    t0 = time.perf_counter()
    mismatches = []
    for i, m in enumerate(random_pool()):
        res = solver.solve_exact(m)
        ref = naive_reference(m)
        ok_cert = verify_protocol(m, res.certificate) and res.certificate.depth == res.value
        cert_log.append(ok_cert)
        if res.value != ref or not ok_cert:
            mismatches.append((i, res.value, ref, ok_cert))
    elapsed = time.perf_counter() - t0
    passed = not mismatches and elapsed < 60.0
    return _result(
        1,
        "solver agrees with naive oracle on 200-matrix pool (< 60 s)",
        passed,
        f"mismatches={mismatches[:3]} elapsed={elapsed:.1f}s",
        t0,
    )


def criterion_2(solver: Solver, cert_log: list) -> CriterionResult:
    t0 = time.perf_counter()
    expected = [1, 2, 3, 3, 4, 4]
    got = []
    cert_ok = True
    naive_ok = True
    for k in range(1, 7):
        m = k_fold_interlace(phi(), k)
        res = solver.solve_exact(m)
        got.append(res.value)
        ok = verify_protocol(m, res.certificate) and res.certificate.depth == res.value
        cert_ok = cert_ok and ok
        cert_log.append(ok)
        if k <= 4:
            naive_ok = naive_ok and naive_reference(m) == res.value
    elapsed = time.perf_counter() - t0
    passed = got == expected and cert_ok and naive_ok and elapsed < 600.0
    return _result(
        2,
        "interlace staircase D(<phi>^k) = ceil(log k)+1 for k=1..6 (< 10 min)",
        passed,
        f"got={got} naive_ok={naive_ok} elapsed={elapsed:.1f}s",
        t0,
    )


def criterion_3(solver: Solver, cert_log: list) -> CriterionResult:
    t0 = time.perf_counter()
    gaps = {}
    cert_ok = True
    for a in (1, 2):
        lo = k_fold_interlace(phi(), 2**a)
        hi = k_fold_interlace(phi(), 2**a + 1)
        r_lo = solver.solve_exact(lo)
        r_hi = solver.solve_exact(hi)
        for m, r in ((lo, r_lo), (hi, r_hi)):
            ok = verify_protocol(m, r.certificate) and r.certificate.depth == r.value
            cert_ok = cert_ok and ok
            cert_log.append(ok)
        gaps[a] = r_hi.value - r_lo.value
    passed = all(g == 1 for g in gaps.values()) and cert_ok
    return _result(
        3,
        "one-bit gap D(<phi>^(2^a+1)) - D(<phi>^(2^a)) = 1 for a in {1,2}",
        passed,
        f"gaps={gaps}",
        t0,
    )


def criterion_4(solver: Solver) -> CriterionResult:
    t0 = time.perf_counter()
    failures = []
    for p in (1, 2, 3, 4):
        for y in (Fraction(1), Fraction(1, 2)):
            res = family_complexity(
                BracketSpec(phi(), p, Fraction(1), y), cap=20_000, solver=solver
            )
            log_y = y.numerator.bit_length() - y.denominator.bit_length()
            z = p + log_y
            rhs = 0 if z <= 0 else (z - 1).bit_length() + 1
            if not (res.exact and res.value >= rhs):
                failures.append((p, str(y), res.value, rhs))
    elapsed = time.perf_counter() - t0
    passed = not failures and elapsed < 300.0
    return _result(
        4,
        "hard seed: exact family min >= ceil(log(p+log y))+1 (< 5 min)",
        passed,
        f"failures={failures} elapsed={elapsed:.1f}s",
        t0,
    )


def lemma_grid():
    """The curated exact-mode grid for the lemma suite (>= 50 bindings)."""
    F = Fraction
    p = phi()
    ident = BooleanMatrix([1, 2], [1, 2], [[1, 0], [0, 1]])
    tri = BooleanMatrix([1, 2], [1, 2], [[1, 1], [1, 0]])
    m23 = BooleanMatrix([1, 2], [1, 2, 3], [[1, 0, 1], [0, 1, 1]])
    bindings = []
    for m in (p, ident, tri):
        for (pp, p2) in ((2, 1), (2, 2), (3, 2)):
            for (y, y2) in ((F(1), F(1)), (F(1), F(1, 2)), (F(1, 2), F(1, 4))):
                bindings.append(
                    (
                        "monotonicity",
                        {"matrix": m, "p": pp, "x": F(1), "y": y,
                         "p2": p2, "x2": F(1), "y2": y2},
                    )
                )
    for m in (p, ident):
        for (pp, l) in ((2, 1), (3, 1), (3, 2)):
            for y in (F(1), F(1, 2)):
                bindings.append(
                    ("projection", {"matrix": m, "p": pp, "x": F(1), "y": y, "l": l})
                )
    for m in (p, m23, ident):
        for (x, y) in ((F(1), F(1)), (F(1), F(1, 2)), (F(1, 2), F(1, 2)), (F(1, 2), F(1, 4))):
            bindings.append(("transpose", {"matrix": m, "x": x, "y": y}))
    for pp in (1, 2, 3):
        for (k, mm) in ((0, 1), (1, 0), (1, 1), (2, 2)):
            bindings.append(
                (
                    "column_partition",
                    {"matrix": p, "p": pp, "x": F(1), "y": F(1, 4), "k": k, "m": mm},
                )
            )
    return bindings


def criterion_5(solver: Solver) -> CriterionResult:
    t0 = time.perf_counter()
    bindings = lemma_grid()
    failures = []
    for name, binding in bindings:
        r = check_named_inequality(name, binding, solver=solver)
        if r.verdict != "pass":
            failures.append((name, r.left, r.right))
    passed = len(bindings) >= 50 and not failures
    return _result(
        5,
        "lemma suite passes in exact mode on the curated grid",
        passed,
        f"bindings={len(bindings)} failures={failures[:3]}",
        t0,
    )


def criterion_6() -> CriterionResult:
    t0 = time.perf_counter()
    eps = Fraction(1, 64)
    s = build_balanced_set(8, 2, (0, 1), epsilon=eps)
    report = verify_balance(s)
    size_ok = s.n_samples <= 4 * s.size_bound()
    passed = report.passed and report.max_relative_deviation <= eps and size_ok
    return _result(
        6,
        "reservoir q=8 t=2 p=2 eps=2^-6 balances within eps and size bound x4",
        passed,
        f"dev={float(report.max_relative_deviation):.6f} samples={s.n_samples} "
        f"bound={s.size_bound()} exhaustive={report.exhaustive}",
        t0,
    )


def criterion_7() -> CriterionResult:
    t0 = time.perf_counter()
    rng = random.Random(POOL_SEED + 7)
    x_grid = [Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]
    bad = []
    for trial in range(1000):
        q = rng.randint(1, 8)
        m = rng.randint(1, 8)
        x = rng.choice(x_grid)
        density = rng.random()
        selection = [
            (b, r)
            for b in range(1, q + 1)
            for r in range(1, m + 1)
            if rng.random() < density
        ]
        t_quota = ceil_frac(m * x)
        beta = Fraction(len(selection), q * m)
        j_set, kept = block_balance(selection, q, m, x)
        if beta < x:
            if j_set or kept:
                bad.append((trial, "nonempty below density"))
            continue
        k_target = q if x == 1 else ceil_frac(q * (beta - x) / (1 - x))
        if len(j_set) < k_target:
            bad.append((trial, "J too small"))
        for b in j_set:
            if sum(1 for bb, _ in kept if bb == b) < t_quota:
                bad.append((trial, f"block {b} under quota"))
    passed = not bad
    return _result(
        7,
        "block balancing meets |J| and quota bounds over 1000 random trials",
        passed,
        f"bad={bad[:3]}",
        t0,
    )


def criterion_8() -> CriterionResult:
    t0 = time.perf_counter()
    rng = random.Random(POOL_SEED + 8)
    bases = [
        phi(),
        BooleanMatrix([1, 2], [1, 2], [[1, 0], [0, 1]]),
        BooleanMatrix([1], [1, 2], [[0, 1]]),
    ]
    bad = []
    for trial in range(100):
        base = rng.choice(bases)
        q = rng.randint(2, 4)
        t = rng.randint(1, min(2, q))
        use_full = rng.random() < 0.5
        if use_full:
            s = build_balanced_set(q, t, base.cols, full_product=True)
        else:
            s = build_balanced_set(q, t, base.cols, epsilon=Fraction(1, 4))
        n = relaxed_interlace(base, q, s)
        q_blocks = sorted(rng.sample(range(1, q + 1), t))
        t_quota = rng.randint(1, base.n_rows)
        selection = set()
        for b in q_blocks:
            chosen = rng.sample(list(base.rows), t_quota)
            selection.update((b, r) for r in chosen)
        # pad with extra rows outside Q sometimes
        for b in range(1, q + 1):
            for r in base.rows:
                if rng.random() < 0.3:
                    selection.add((b, r))
        ep = Equipartition(
            k=q,
            base_rows=base.rows,
            q_blocks=frozenset(q_blocks),
            quota=t_quota,
            selection=frozenset(selection),
        )
        keep = max(1, int(s.n_samples * (0.6 + 0.4 * rng.random())))
        c_prime = rng.sample(range(s.n_samples), keep) if keep < s.n_samples else list(
            range(s.n_samples)
        )
        y = Fraction(len(c_prime), s.n_samples) - Fraction(1, 2 * s.n_samples)
        if y <= 0:
            continue
        eps = s.realized_epsilon if s.realized_epsilon is not None else s.epsilon
        try:
            res = relaxed_to_classical(
                n, s, q_blocks, ep, c_prime, y, base=base
            )
        except Exception as exc:  # DensityTooLow counts as a failed trial
            bad.append((trial, type(exc).__name__))
            continue
        quota = ceil_mul_pow(base.n_cols**t, y / (1 + eps))
        if not res.certificate_ok or res.distinct_patterns < quota:
            bad.append((trial, res.distinct_patterns, quota, res.certificate_ok))
    passed = not bad
    return _result(
        8,
        "relaxed-to-classical certificates verify over 100 random trials",
        passed,
        f"bad={bad[:3]}",
        t0,
    )


def criterion_9(solver: Solver, cert_log: list) -> CriterionResult:
    t0 = time.perf_counter()
    checks = {}
    inst_a = VbpInstance(n=1, d=1, m=4, vectors=((1,),))
    inst_b = VbpInstance(n=2, d=1, m=4, vectors=((1,), (1,)))
    out_a = reduce_instance(inst_a, cell_budget=1 << 28)
    out_b = reduce_instance(inst_b, cell_budget=1 << 28)

    # stage-4 preservation: any fixed j' slice recovers M3
    slice_cols = [c for c in out_a.m4.cols if c[0] == 1]
    sl = extract(out_a.m4, out_a.m3.rows, slice_cols)
    checks["preservation"] = canonicalize(sl) == canonicalize(out_a.m3)

    # completeness: every (block, row of M1) selector realized in M2 columns
    complete = True
    for block in range(1, out_a.params.q2 + 1):
        seen = {d_label[block - 1] for d_label in out_a.m2.cols}
        complete = complete and all(r in seen for r in out_a.m1.rows)
    checks["m1_complete_in_m2"] = complete

    # gap extractions for i in {0, 1, 2} plus the one-bit jump
    d_values = {}
    for out, block, want_i in ((out_a, 4, 0), (out_a, 1, 1), (out_b, 1, 2)):
        sub, i, exponent = extract_gap_submatrix(out, block)
        target = k_fold_interlace(phi(), exponent)
        res = solver.solve_exact(sub)
        ok_cert = verify_protocol(sub, res.certificate) and res.certificate.depth == res.value
        cert_log.append(ok_cert)
        checks[f"gap_i{want_i}"] = (
            i == want_i
            and exponent == out.params.q1 + 1 + i
            and canonicalize(sub) == canonicalize(target)
            and ok_cert
        )
        d_values[want_i] = res.value
    checks["one_bit_jump"] = d_values[2] - d_values[1] == 1 and d_values[1] == d_values[0]
    passed = all(checks.values())
    return _result(
        9,
        "reduction structure: preservation, completeness, gap shapes, jump",
        passed,
        f"checks={checks} D={d_values}",
        t0,
    )


def criterion_10() -> CriterionResult:
    t0 = time.perf_counter()
    report = measure_growth([4, 8, 16])
    finite = all(
        x == x and abs(x) != float("inf")
        for x in (report.rows_exponent, report.cols_exponent, report.time_exponent)
    )
    exact = all(r.cols_m4 == 32 * r.rows_m2**4 for r in report.rows)
    elapsed = time.perf_counter() - t0
    passed = finite and exact and report.cols_exponent <= 8.0 + 1e-9 and elapsed < 600.0
    return _result(
        10,
        "growth sweep d in {4,8,16}: finite exponents, exact |C4| (< 10 min)",
        passed,
        f"rows_exp={report.rows_exponent:.2f} cols_exp={report.cols_exponent:.2f} "
        f"elapsed={elapsed:.1f}s",
        t0,
    )


def criterion_11(cert_log: list) -> CriterionResult:
    t0 = time.perf_counter()
    passed = bool(cert_log) and all(cert_log)
    return _result(
        11,
        "every solver certificate in criteria 1-3 and 9 verifies at depth D",
        passed,
        f"certificates={len(cert_log)} all_ok={all(cert_log) if cert_log else False}",
        t0,
    )


def run_acceptance() -> list[CriterionResult]:
    solver = Solver()
    cert_log: list[bool] = []
    results = [
        criterion_1(solver, cert_log),
        criterion_2(solver, cert_log),
        criterion_3(solver, cert_log),
        criterion_4(solver),
        criterion_5(solver),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(solver, cert_log),
        criterion_10(),
    ]
    results.append(criterion_11(cert_log))
    return results
