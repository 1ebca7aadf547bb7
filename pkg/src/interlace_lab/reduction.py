"""The {0,1}-vector-bin-packing to communication-matrix reduction.

Pipeline: preprocess the instance (pigeonhole check, threefold coordinate
replication, zero-padding to a power-of-two dimension), then build

    M1 = relaxed interlace of the seed [1 0], order q1,
    M2 = relaxed interlace of transpose(M1), order q2, alphabet rows(M1),
    M3 = classical 4-fold interlace of transpose(M2),
    M4 = M3 with every column duplicated 32 times plus one row per
         instance vector.

A vector row meets column (j', (s,s,s,s)) - all four selectors equal,
the selector's block being dimension i - with the 5-fold seed interlace:
row p of it if the vector is the p-th one active at dimension i, the
default row 5 otherwise.  Restricting to one selector block and
deduplicating yields the seed interlaced q1+1+i times, which moves the
complexity by one exactly when q1+1+i crosses a power of two; that is
the YES/NO gap the reduction rides on.

Full-scale Table-3 parameters are recorded faithfully (they are far
beyond desk scale); building runs on toy overrides or full-product
reservoirs, and growth measurement materializes a stage only while it
fits the cell budget, reporting exact sizes from the construction laws
otherwise.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BinCountUnsupported,
    DomainTooSmall,
    NoSuchColumn,
    SizeOverflow,
)
from .interlace import DEFAULT_CELL_BUDGET, k_fold_interlace, relaxed_interlace
from .matrix import BooleanMatrix, extract, phi, transpose
from .reservoir import BalancedColumnSet, build_balanced_set, default_epsilon


# ---------------------------------------------------------------------------
# instances

@dataclass(frozen=True)
class VbpInstance:
    n: int
    d: int
    m: int
    vectors: tuple[tuple[int, ...], ...]
    processed: bool = False

    def __post_init__(self):
        if len(self.vectors) != self.n:
            raise ValueError("vector count mismatch")
        for v in self.vectors:
            if len(v) != self.d or any(b not in (0, 1) for b in v):
                raise ValueError("vectors must be 0/1 of length d")

    def coordinate_count(self, j: int) -> int:
        """Number of vectors with a one in coordinate j (1-based)."""
        return sum(v[j - 1] for v in self.vectors)

    def active_vectors(self, j: int) -> tuple[int, ...]:
        """1-based indices of vectors active at coordinate j, input order."""
        return tuple(i + 1 for i, v in enumerate(self.vectors) if v[j - 1] == 1)

    def to_text(self) -> str:
        lines = [f"{self.n} {self.d} {self.m}"]
        lines.extend("".join(map(str, v)) for v in self.vectors)
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "VbpInstance":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        n, d, m = map(int, lines[0].split())
        vectors = tuple(tuple(int(ch) for ch in ln.strip()) for ln in lines[1 : 1 + n])
        return VbpInstance(n=n, d=d, m=m, vectors=vectors)


@dataclass(frozen=True)
class ImmediateNo:
    """Pigeonhole verdict: this coordinate already overfills every packing."""

    coordinate: int


def preprocess(raw: VbpInstance) -> VbpInstance | ImmediateNo:
    """Pigeonhole check, threefold replication, power-of-two padding."""
    if raw.m != 4:
        raise BinCountUnsupported("the reduction is stated for m = 4 bins")
    if raw.processed:
        return raw
    for j in range(1, raw.d + 1):
        if raw.coordinate_count(j) > 4:
            return ImmediateNo(coordinate=j)
    d3 = 3 * raw.d
    padded = 1 << max(2, (d3 - 1).bit_length())
    vectors = []
    for copy in range(3):
        for v in raw.vectors:
            out = [0] * padded
            for j, bit in enumerate(v):
                out[copy * raw.d + j] = bit
            vectors.append(tuple(out))
    return VbpInstance(
        n=3 * raw.n, d=padded, m=4, vectors=tuple(vectors), processed=True
    )


# ---------------------------------------------------------------------------
# parameters

@dataclass(frozen=True)
class ReductionParams:
    """Stage orders, balance thresholds, and bookkeeping constants.

    q/t values follow the published defaults (powers of two where the
    recipe rounds up); the robustness depths b* are informational floats
    recorded for provenance and never used to build matrices.
    """

    q1: int
    t1: int
    q2: int
    t2: int
    q3: int = 4
    t3: int = 4
    dup: int = 32
    delta: Fraction = Fraction(1, 10)
    big_delta: int = 5
    b0: float = 0.0
    b1: float = 0.0
    b1_prime: float = 0.0
    b2: float = 0.0
    b2_prime: float = 0.0
    eps1: Optional[Fraction] = None
    eps2: Optional[Fraction] = None
    full_product: bool = False


def ceil_pow2(value: Fraction | int) -> int:
    """Least power of two >= value (value > 0)."""
    v = Fraction(value)
    if v <= 0:
        raise ValueError("ceil_pow2 needs a positive argument")
    out = 1
    while out < v:
        out *= 2
    return out


def _ceil_pow2_ratio(num: int, log_arg: int) -> int:
    """Least power of two >= num / log2(log_arg), exactly (log_arg >= 2)."""
    # 2^j >= num / log2(L)  <=>  L^(2^j) >= 2^num
    j = 0
    while log_arg ** (1 << j) < 2**num:
        j += 1
    return 1 << j


def default_params(d: int) -> ReductionParams:
    """Table of published defaults for a preprocessed dimension d."""
    if d < 4 or d & (d - 1):
        raise DomainTooSmall("need d >= 4 and a power of two")
    log_d = d.bit_length() - 1
    q1 = ceil_pow2(2 * log_d * log_d) - 2
    t1 = ceil_pow2(64 * log_d)
    q2 = d
    t2 = _ceil_pow2_ratio(3 * log_d, log_d) if log_d >= 2 else ceil_pow2(3 * log_d)
    return ReductionParams(
        q1=q1,
        t1=t1,
        q2=q2,
        t2=t2,
        b0=64 * math.log2(64 * log_d),
        b1=2 * log_d,
        b1_prime=3 * log_d,
        b2=3 * math.log2(log_d) if log_d > 1 else 0.0,
        b2_prime=4 * math.log2(log_d) if log_d > 1 else 0.0,
    )


def toy_params(
    q1: int = 2,
    q2: int = 4,
    t1: int = 2,
    t2: int = 2,
    full_product: bool = True,
    **overrides,
) -> ReductionParams:
    """Desk-scale override set; full-product reservoirs by default."""
    return ReductionParams(
        q1=q1, t1=t1, q2=q2, t2=t2, full_product=full_product, **overrides
    )


# ---------------------------------------------------------------------------
# stages

def build_stage1(
    params: ReductionParams, cell_budget: int = DEFAULT_CELL_BUDGET
) -> tuple[BooleanMatrix, BalancedColumnSet]:
    seed = phi()
    if params.full_product:
        s1 = build_balanced_set(params.q1, min(params.t1, params.q1), seed.cols, full_product=True)
    else:
        t1 = min(params.t1, params.q1)
        eps = params.eps1 or default_epsilon(params.q1, t1, seed.n_cols)
        s1 = build_balanced_set(params.q1, t1, seed.cols, epsilon=eps)
    return relaxed_interlace(seed, params.q1, s1, cell_budget=cell_budget), s1


def build_stage2(
    m1: BooleanMatrix,
    params: ReductionParams,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> tuple[BooleanMatrix, BalancedColumnSet]:
    base = transpose(m1)  # alphabet of the reservoir is rows(M1)
    t2 = min(params.t2, params.q2)
    if params.full_product:
        s2 = build_balanced_set(params.q2, t2, base.cols, full_product=True)
    else:
        eps = params.eps2 or default_epsilon(params.q2, t2, base.n_cols)
        s2 = build_balanced_set(params.q2, t2, base.cols, epsilon=eps)
    return relaxed_interlace(base, params.q2, s2, cell_budget=cell_budget), s2


def build_stage3(
    m2: BooleanMatrix, params: ReductionParams, cell_budget: int = DEFAULT_CELL_BUDGET
) -> BooleanMatrix:
    return k_fold_interlace(transpose(m2), params.q3, cell_budget=cell_budget)


@dataclass(frozen=True)
class ReductionOutput:
    m4: BooleanMatrix
    row_provenance: dict
    col_provenance: dict
    params: ReductionParams
    instance: VbpInstance
    m1: Optional[BooleanMatrix] = None
    m2: Optional[BooleanMatrix] = None
    m3: Optional[BooleanMatrix] = None
    s1: Optional[BalancedColumnSet] = None
    s2: Optional[BalancedColumnSet] = None


def _phi5() -> BooleanMatrix:
    return k_fold_interlace(phi(), 5)


def build_stage4(
    instance: VbpInstance,
    m2: BooleanMatrix,
    m3: BooleanMatrix,
    params: ReductionParams,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> tuple[BooleanMatrix, dict, dict]:
    """Duplicate every M3 column 32 times and append one row per vector."""
    if not instance.processed:
        raise ValueError("stage 4 needs a preprocessed instance")
    n = instance.n
    n_c3 = m3.n_cols
    total = (m3.n_rows + n) * params.dup * n_c3
    if total > cell_budget:
        raise SizeOverflow(f"stage 4 needs {total} cells (budget {cell_budget})")
    phi5 = _phi5()
    dup = params.dup
    rows = list(m3.rows) + list(range(1, n + 1))
    cols = [(jp, c3) for jp in range(1, dup + 1) for c3 in m3.cols]
    bits = np.empty((len(rows), dup * n_c3), dtype=np.uint8)
    bits[: m3.n_rows] = np.tile(m3.bits, (1, dup))

    # selector block index per M3 column when all four selectors agree
    diag_block = np.zeros(n_c3, dtype=np.int64)  # 0 = not all-equal
    for ci, c3 in enumerate(m3.cols):
        j1 = c3[0]
        if all(s == j1 for s in c3[1:]):
            diag_block[ci] = j1[0]  # R2 label is (block, C1 label)

    # vector-row values depend only on j'; lay them out j'-major
    default_full = np.repeat(phi5.bits[4], n_c3).reshape(dup, n_c3)
    for v in range(1, n + 1):
        row = default_full.copy()
        for dim in range(1, min(instance.d, params.q2) + 1):
            actives = instance.active_vectors(dim)
            if v not in actives:
                continue
            p_rank = actives.index(v) + 1
            mask = diag_block == dim
            if mask.any():
                row[:, mask] = phi5.bits[p_rank - 1][:, None]
        bits[m3.n_rows + v - 1] = row.reshape(-1)

    row_prov = {lab: ("stage3", lab) for lab in m3.rows}
    row_prov.update({v: ("vector", v) for v in range(1, n + 1)})
    col_prov = {(jp, c3): (jp, c3) for jp, c3 in cols}
    return BooleanMatrix(rows, cols, bits), row_prov, col_prov


def reduce_instance(
    raw: VbpInstance,
    params: Optional[ReductionParams] = None,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    keep_stages: bool = True,
) -> ReductionOutput | ImmediateNo:
    """Full pipeline: preprocess then build M1..M4 with provenance."""
    inst = preprocess(raw)
    if isinstance(inst, ImmediateNo):
        return inst
    if params is None:
        params = replace(toy_params(), q2=inst.d)
    if params.q2 < inst.d:
        raise ValueError(f"q2={params.q2} cannot embed all {inst.d} dimensions")
    m1, s1 = build_stage1(params, cell_budget)
    m2, s2 = build_stage2(m1, params, cell_budget)
    m3 = build_stage3(m2, params, cell_budget)
    m4, row_prov, col_prov = build_stage4(inst, m2, m3, params, cell_budget)
    return ReductionOutput(
        m4=m4,
        row_provenance=row_prov,
        col_provenance=col_prov,
        params=params,
        instance=inst,
        m1=m1 if keep_stages else None,
        m2=m2 if keep_stages else None,
        m3=m3 if keep_stages else None,
        s1=s1 if keep_stages else None,
        s2=s2 if keep_stages else None,
    )


# ---------------------------------------------------------------------------
# gap extraction

def extract_gap_submatrix(
    out: ReductionOutput, block: int, c_star: Optional[int] = None
) -> tuple[BooleanMatrix, int, int]:
    """Rows (1, d) for every reservoir tuple d plus all vector rows;
    columns (j', (s,s,s,s)) over every selector s = (block, c), c in C1.

    Returns (submatrix, active_count, expected_exponent): after removing
    duplicates the submatrix is canonically the seed interlaced
    expected_exponent = q1 + 1 + i times (the +1 is the default vector
    row, present whenever some vector is inactive at the dimension).
    """
    if out.m2 is None or out.m1 is None:
        raise ValueError("gap extraction needs retained stage matrices")
    if c_star is not None and c_star != block:
        raise ValueError(
            "the construction ties vector activity to the selector block; "
            "c_star must equal block"
        )
    q2 = out.params.q2
    if not (1 <= block <= q2):
        raise ValueError(f"block {block} outside [1, {q2}]")
    c1_labels = out.m1.cols
    # reservoir coverage: every M1 row must appear as some selector's
    # block-th coordinate, else the embedded copy is incomplete
    covered = {d_label[block - 1] for d_label in out.m2.cols}
    missing = [r for r in out.m1.rows if r not in covered]
    if missing:
        raise NoSuchColumn(
            f"reservoir lost rows {missing} at block {block}; "
            "the embedded seed copy is incomplete"
        )
    row_sel = [(1, d) for d in out.m2.cols]
    row_sel += [v for v in range(1, out.instance.n + 1)]
    col_sel = [
        (jp, ((block, c),) * 4)
        for jp in range(1, out.params.dup + 1)
        for c in c1_labels
    ]
    sub = extract(out.m4, row_sel, col_sel)
    actives = (
        out.instance.active_vectors(block) if block <= out.instance.d else ()
    )
    i = len(actives)
    has_default = i < out.instance.n
    expected = out.params.q1 + i + (1 if has_default else 0)
    return sub, i, expected


# ---------------------------------------------------------------------------
# growth measurement

@dataclass(frozen=True)
class GrowthRow:
    d: int
    rows_m4: int
    cols_m4: int
    rows_m2: int
    cols_m2: int
    seconds: float
    materialized_through: str  # last stage actually built


@dataclass(frozen=True)
class GrowthReport:
    rows: tuple[GrowthRow, ...]
    rows_exponent: float
    cols_exponent: float
    time_exponent: float


def _fit_exponent(ds, values) -> float:
    xs = np.log2(np.array(ds, dtype=float))
    ys = np.log2(np.array(values, dtype=float))
    if len(ds) < 2:
        return float("nan")
    return float(np.polyfit(xs, ys, 1)[0])


def growth_params(d: int) -> ReductionParams:
    """Toy scaling for the growth sweep: q1 = ceil_pow2(log d), t = 1.

    A power-of-two q1 keeps the stage-2 alphabet a power of two, so no
    codeword is ever dropped and the reservoir sizes grow smoothly in d.
    """
    if d < 4 or d & (d - 1):
        raise DomainTooSmall("need d >= 4 and a power of two")
    log_d = d.bit_length() - 1
    return ReductionParams(
        q1=ceil_pow2(log_d),
        t1=1,
        q2=d,
        t2=1,
        eps1=Fraction(1, 2),
        eps2=Fraction(1, 2),
        full_product=False,
    )


def _growth_instance(d: int, n_vectors: int) -> VbpInstance:
    raw = VbpInstance(
        n=n_vectors, d=1, m=4, vectors=tuple((1,) for _ in range(n_vectors))
    )
    inst = preprocess(raw)
    assert isinstance(inst, VbpInstance)
    if inst.d > d:
        raise ValueError(f"toy instance needs d >= {inst.d}")
    return VbpInstance(
        n=inst.n,
        d=d,
        m=4,
        vectors=tuple(v + (0,) * (d - inst.d) for v in inst.vectors),
        processed=True,
    )


def measure_growth(
    d_values: Sequence[int],
    cell_budget: int = DEFAULT_CELL_BUDGET,
    n_vectors: int = 1,
) -> GrowthReport:
    """Build the pipeline per d and report exact M4 sizes plus wall time.

    Every d in the sweep is materialized through the same stage (the
    deepest one all of them can afford within the cell budget) so the
    timings are comparable; deeper sizes come from the construction laws
    |R4| = 4|C2| + n and |C4| = 32 |R2|^4, which materialized runs
    cross-check exactly.
    """
    ds = sorted(d_values)
    # dry pass: reservoir sizes determine how deep each d can go
    depth = 3
    prepared = []
    for d in ds:
        params = growth_params(d)
        inst = _growth_instance(d, n_vectors)
        m1, s1 = build_stage1(params, cell_budget)
        m2, s2 = build_stage2(m1, params, cell_budget)
        r2, c2 = m2.n_rows, m2.n_cols
        d_depth = 1
        if params.q3 * c2 * r2**params.q3 <= cell_budget:
            d_depth = 2
            if (params.q3 * c2 + inst.n) * params.dup * r2**params.q3 <= cell_budget:
                d_depth = 3
        depth = min(depth, d_depth)
        prepared.append((d, params, inst))
    rows = []
    for d, params, inst in prepared:
        t0 = time.perf_counter()
        m1, _ = build_stage1(params, cell_budget)
        m2, _ = build_stage2(m1, params, cell_budget)
        built = "m2"
        r2, c2 = m2.n_rows, m2.n_cols
        rows_m4 = params.q3 * c2 + inst.n
        cols_m4 = params.dup * r2**params.q3
        if depth >= 2:
            m3 = build_stage3(m2, params, cell_budget)
            built = "m3"
            if depth >= 3:
                m4, _, _ = build_stage4(inst, m2, m3, params, cell_budget)
                built = "m4"
                assert m4.n_rows == rows_m4 and m4.n_cols == cols_m4
        seconds = time.perf_counter() - t0
        rows.append(
            GrowthRow(
                d=d,
                rows_m4=rows_m4,
                cols_m4=cols_m4,
                rows_m2=r2,
                cols_m2=c2,
                seconds=seconds,
                materialized_through=built,
            )
        )
    return GrowthReport(
        rows=tuple(rows),
        rows_exponent=_fit_exponent(ds, [r.rows_m4 for r in rows]),
        cols_exponent=_fit_exponent(ds, [r.cols_m4 for r in rows]),
        time_exponent=_fit_exponent(ds, [max(r.seconds, 1e-6) for r in rows]),
    )
