"""interlace-lab: build, solve, verify, and measure from the command line.

Output discipline: human-readable report lines go to stdout prefixed
with '# '; machine-readable lines are single-space-separated with a
fixed leading tag (D, DECIDE, LEMMA, RESERVOIR, FAMILY, REDUCE,
IMMEDIATE_NO, GAP, GROWTH, ACCEPT) and are byte-identical across runs
for fixed flags.  Exit codes: 0 success, 1 semantic negative (e.g. a
false decision or failed lemma), 2 usage error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

from .brackets import BracketSpec, family_complexity
from .errors import BudgetError, InterlaceLabError
from .harness import check_double_interlace, check_named_inequality, check_robustness, NAMED_LEMMAS
from .matrix import BooleanMatrix
from .reduction import (
    ImmediateNo,
    ReductionParams,
    VbpInstance,
    extract_gap_submatrix,
    measure_growth,
    reduce_instance,
    toy_params,
)
from .reservoir import build_balanced_set, reservoir_to_text, verify_balance
from .solver import Solver, tree_to_sexpr, verify_protocol
from .interlace import k_fold_interlace
from .matrix import canonicalize, phi


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name)
    return int(value) if value else default


def _fraction(text: str) -> Fraction:
    return Fraction(text)


def _load_matrix(path: str) -> BooleanMatrix:
    return BooleanMatrix.from_text(Path(path).read_text())


def _parse_params(text: str) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        key, _, value = item.partition("=")
        if not _:
            raise ValueError(f"bad parameter item {item!r}")
        out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interlace-lab",
        description="interlace constructions, balanced reservoirs, exact "
        "communication-complexity solving, and the VBP reduction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("balanced-set", help="build a (q,t)-balanced reservoir")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--p", type=int, required=True, help="alphabet size")
    p.add_argument("--epsilon", type=_fraction, default=None)
    p.add_argument("--full-product", action="store_true")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--verify", action="store_true", help="run verify_balance")

    p = sub.add_parser("family", help="bracket family complexity")
    p.add_argument("--matrix", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--x", type=_fraction, required=True)
    p.add_argument("--y", type=_fraction, required=True)
    p.add_argument("--cap", type=int, default=_env_int("INTERLACE_LAB_FAMILY_CAP", 200_000))
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--witness", type=str, default=None)

    p = sub.add_parser("solve", help="exact deterministic communication complexity")
    p.add_argument("--matrix", required=True)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--cert", type=str, default=None)
    p.add_argument("--node-cap", type=int, default=_env_int("INTERLACE_LAB_NODE_CAP", 100_000_000))

    p = sub.add_parser("verify-lemma", help="run a named lemma check")
    p.add_argument("--name", required=True, choices=NAMED_LEMMAS + ("robustness", "double_interlace"))
    p.add_argument("--matrix", required=True)
    p.add_argument("--params", type=str, default="")
    p.add_argument("--cap", type=int, default=_env_int("INTERLACE_LAB_FAMILY_CAP", 200_000))

    p = sub.add_parser("reduce", help="compile a VBP instance into M4")
    p.add_argument("--instance", required=True)
    p.add_argument("--toy", action="store_true", help="full-product reservoirs")
    p.add_argument("--params", type=str, default="")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--provenance", type=str, default=None)
    p.add_argument("--cell-budget", type=int, default=_env_int("INTERLACE_LAB_CELL_BUDGET", 1 << 28))

    p = sub.add_parser("gap-demo", help="extract and solve a gap submatrix")
    p.add_argument("--instance", required=True)
    p.add_argument("--block", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--params", type=str, default="")
    p.add_argument("--cell-budget", type=int, default=_env_int("INTERLACE_LAB_CELL_BUDGET", 1 << 28))

    p = sub.add_parser("measure-growth", help="size/time growth over dimensions")
    p.add_argument("--d", type=str, default="4,8,16", help="comma-separated powers of two")
    p.add_argument("--cell-budget", type=int, default=_env_int("INTERLACE_LAB_CELL_BUDGET", 1 << 26))

    sub.add_parser("selftest", help="run the acceptance suite")
    return parser


def _cmd_balanced_set(args) -> int:
    s = build_balanced_set(
        args.q,
        args.t,
        tuple(range(args.p)),
        epsilon=args.epsilon,
        full_product=args.full_product,
    )
    realized = (
        f"{s.realized_epsilon.numerator}/{s.realized_epsilon.denominator}"
        if s.realized_epsilon is not None
        else "-"
    )
    print(
        f"RESERVOIR q={s.q} t={s.t} p={s.p} "
        f"epsilon={s.epsilon.numerator}/{s.epsilon.denominator} "
        f"samples={s.n_samples} distinct={s.distinct_tuples().shape[0]} realized={realized}"
    )
    if args.verify:
        report = verify_balance(s)
        print(
            f"BALANCE pass={str(report.passed).lower()} "
            f"max_dev={report.max_relative_deviation.numerator}/{report.max_relative_deviation.denominator} "
            f"exhaustive={str(report.exhaustive).lower()}"
        )
        if not report.passed:
            return 1
    if args.out:
        Path(args.out).write_text(reservoir_to_text(s))
        print(f"# wrote reservoir to {args.out}")
    return 0


def _cmd_family(args) -> int:
    m = _load_matrix(args.matrix)
    spec = BracketSpec(m, args.p, args.x, args.y)
    res = family_complexity(spec, cap=args.cap, samples=args.samples, seed=args.seed)
    print(
        f"FAMILY value={res.value} exact={str(res.exact).lower()} "
        f"members={res.members_examined}"
    )
    if args.witness:
        Path(args.witness).write_text(res.witness.to_text())
        print(f"# wrote witness to {args.witness}")
    return 0


def _cmd_solve(args) -> int:
    m = _load_matrix(args.matrix)
    solver = Solver(node_cap=args.node_cap)
    if args.budget is not None:
        ok = solver.decide(m, args.budget)
        print(f"DECIDE {str(ok).lower()} b={args.budget}")
        if ok and args.cert is not None:
            res = solver.solve_exact(m)
            Path(args.cert).write_text(tree_to_sexpr(res.certificate) + "\n")
        return 0 if ok else 1
    res = solver.solve_exact(m)
    assert verify_protocol(m, res.certificate)
    print(f"D {res.value}")
    print(
        f"# nodes={res.stats.nodes_expanded} memo_hits={res.stats.memo_hits} "
        f"rank_prunes={res.stats.rank_prunes} count_prunes={res.stats.count_prunes}"
    )
    if args.cert:
        Path(args.cert).write_text(tree_to_sexpr(res.certificate) + "\n")
        print(f"# wrote certificate to {args.cert}")
    return 0


def _coerce_binding_value(text: str):
    try:
        return int(text)
    except ValueError:
        return Fraction(text)


def _cmd_verify_lemma(args) -> int:
    m = _load_matrix(args.matrix)
    params = {k: _coerce_binding_value(v) for k, v in _parse_params(args.params).items()}
    if args.name == "robustness":
        res = check_robustness(m, params["delta"], int(params["b"]), cap=args.cap)
    elif args.name == "double_interlace":
        res = check_double_interlace(m, params["delta"], int(params["b"]), cap=args.cap)
    else:
        binding = {"matrix": m}
        binding.update(params)
        res = check_named_inequality(args.name, binding, cap=args.cap)
    left = str(res.left).replace(" ", "")
    right = str(res.right).replace(" ", "")
    print(f"LEMMA {args.name} {res.verdict} {left} {right}")
    if res.vacuous:
        print("# vacuous pass: a premise of the lemma does not hold here")
    for name, holds, detail in res.premises:
        print(f"# premise: {name} -> {holds} ({detail})")
    return 0 if res.verdict == "pass" else 1


def _reduction_params(args, instance_d: int) -> ReductionParams:
    """Toy defaults (full-product reservoirs) with --params overrides.

    Providing eps1/eps2 switches the reservoirs to the AGHP generator.
    """
    overrides = _parse_params(args.params)
    kwargs = {"q2": instance_d}
    for key in ("q1", "t1", "q2", "t2"):
        if key in overrides:
            kwargs[key] = int(overrides[key])
    aghp = False
    if "eps1" in overrides:
        kwargs["eps1"] = Fraction(overrides["eps1"])
        aghp = True
    if "eps2" in overrides:
        kwargs["eps2"] = Fraction(overrides["eps2"])
        aghp = True
    return toy_params(full_product=not aghp, **kwargs)


def _cmd_reduce(args) -> int:
    from .reduction import preprocess

    raw = VbpInstance.from_text(Path(args.instance).read_text())
    pre = preprocess(raw)
    if isinstance(pre, ImmediateNo):
        print(f"IMMEDIATE_NO coord={pre.coordinate}")
        return 0
    params = _reduction_params(args, pre.d)
    out = reduce_instance(raw, params=params, cell_budget=args.cell_budget)
    print(f"REDUCE rows={out.m4.n_rows} cols={out.m4.n_cols} q1={out.params.q1} q2={out.params.q2}")
    if args.out:
        Path(args.out).write_text(out.m4.to_text())
        print(f"# wrote M4 to {args.out}")
    if args.provenance:
        with open(args.provenance, "w") as fh:
            for lab, prov in out.row_provenance.items():
                fh.write(f"row\t{lab}\t{prov}\n")
            for lab, prov in out.col_provenance.items():
                fh.write(f"col\t{lab}\t{prov}\n")
        print(f"# wrote provenance to {args.provenance}")
    return 0


def _cmd_gap_demo(args) -> int:
    raw = VbpInstance.from_text(Path(args.instance).read_text())
    from .reduction import preprocess

    pre = preprocess(raw)
    if isinstance(pre, ImmediateNo):
        print(f"IMMEDIATE_NO coord={pre.coordinate}")
        return 0
    block = args.block if args.block is not None else args.dim
    if block is None:
        raise ValueError("gap-demo needs --block or --dim")
    if args.dim is not None and args.block is not None and args.dim != args.block:
        raise ValueError("--dim must equal --block (activity follows the selector block)")
    out = reduce_instance(
        raw, params=_reduction_params(args, pre.d), cell_budget=args.cell_budget
    )
    sub, i, exponent = extract_gap_submatrix(out, block)
    target = k_fold_interlace(phi(), exponent)
    same = canonicalize(sub) == canonicalize(target)
    solver = Solver()
    d_sub = solver.solve_exact(sub).value
    d_target = solver.solve_exact(target).value
    print(
        f"GAP block={block} i={i} expected=phi^{exponent} "
        f"canonical_equal={str(same).lower()} D={d_sub} D_expected={d_target}"
    )
    return 0 if same else 1


def _cmd_measure_growth(args) -> int:
    d_values = [int(x) for x in args.d.split(",") if x]
    report = measure_growth(d_values, cell_budget=args.cell_budget)
    for row in report.rows:
        print(f"GROWTH d={row.d} rows={row.rows_m4} cols={row.cols_m4} built={row.materialized_through}")
        print(f"# d={row.d} took {row.seconds:.3f}s")
    print(
        f"GROWTH-FIT rows_exp={report.rows_exponent:.4f} "
        f"cols_exp={report.cols_exponent:.4f}"
    )
    print(f"# time exponent {report.time_exponent:.3f}")
    return 0


def _cmd_selftest(_args) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance()
    failed = 0
    for r in results:
        status = "pass" if r.passed else "fail"
        print(f"ACCEPT {r.number} {status}")
        print(f"# {r.number}: {r.description} [{r.seconds:.1f}s] {r.detail}")
        if not r.passed:
            failed += 1
    print(f"# {len(results) - failed}/{len(results)} criteria passed")
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "balanced-set": _cmd_balanced_set,
        "family": _cmd_family,
        "solve": _cmd_solve,
        "verify-lemma": _cmd_verify_lemma,
        "reduce": _cmd_reduce,
        "gap-demo": _cmd_gap_demo,
        "measure-growth": _cmd_measure_growth,
        "selftest": _cmd_selftest,
    }
    try:
        return handlers[args.command](args)
    except BudgetError as exc:
        print(f"# budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (InterlaceLabError, ValueError, OSError) as exc:
        print(f"# error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
