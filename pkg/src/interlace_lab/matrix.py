"""Labeled Boolean matrices: extraction, transpose, canonical forms, subgames.

A matrix is a total function rows x cols -> {0,1} with structured,
duplicate-free label lists on both axes.  Values are immutable after
construction and safe to share; every operation returns a fresh matrix.

Internal bit tricks: a column is an integer whose bit r is the entry in
row r.  The canonical form of a matrix is the lexicographically smallest
(sorted column list) over all permutations of the smaller axis, after
removing duplicate rows and columns; it is therefore invariant under
both permutation and duplication of rows/columns, and two matrices with
equal canonical forms are literally equal up to those moves.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, EmptySelection, UnknownLabel
from .labels import Label, label_key, label_to_sexpr, parse_labels

# Axes with at most this many elements are canonized by exhaustive
# permutation; larger ones fall back to a sound (but possibly
# permutation-sensitive) refinement form.
_CANON_PERM_LIMIT = 7


class BooleanMatrix:
    """Immutable 0/1 matrix with ordered, duplicate-free labels."""

    __slots__ = ("rows", "cols", "bits", "_col_ints")

    def __init__(self, rows: Sequence[Label], cols: Sequence[Label], bits):
        rows = tuple(rows)
        cols = tuple(cols)
        if not rows or not cols:
            raise EmptySelection("matrix needs at least one row and one column")
        if len(set(rows)) != len(rows):
            raise ValueError("duplicate row label")
        if len(set(cols)) != len(cols):
            raise ValueError("duplicate column label")
        arr = np.ascontiguousarray(np.asarray(bits, dtype=np.uint8))
        if arr.shape != (len(rows), len(cols)):
            raise ValueError(f"bits shape {arr.shape} != ({len(rows)}, {len(cols)})")
        if arr.size and arr.max() > 1:
            raise ValueError("entries must be 0/1")
        arr.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "bits", arr)
        object.__setattr__(self, "_col_ints", None)

    def __setattr__(self, name, value):
        raise AttributeError("BooleanMatrix is immutable")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.cols))

    def row_index(self, label: Label) -> int:
        try:
            return self.rows.index(label)
        except ValueError:
            raise UnknownLabel(f"row label {label!r} not in matrix") from None

    def col_index(self, label: Label) -> int:
        try:
            return self.cols.index(label)
        except ValueError:
            raise UnknownLabel(f"column label {label!r} not in matrix") from None

    def entry(self, row: Label, col: Label) -> int:
        return int(self.bits[self.row_index(row), self.col_index(col)])

    def col_ints(self) -> tuple[int, ...]:
        """Columns as integers; bit r of column c is the (r, c) entry."""
        cached = self._col_ints
        if cached is None:
            weights = 1 << np.arange(self.n_rows, dtype=object)
            cached = tuple(int(x) for x in (self.bits.astype(object).T @ weights))
            object.__setattr__(self, "_col_ints", cached)
        return cached

    def __eq__(self, other) -> bool:
        if not isinstance(other, BooleanMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.bits, other.bits)
        )

    __hash__ = None  # value identity via labels+bits; not hashable

    def __repr__(self) -> str:
        return f"BooleanMatrix({self.n_rows}x{self.n_cols})"

    def to_text(self) -> str:
        lines = [f"{self.n_rows} {self.n_cols}"]
        lines.append("R " + " ".join(label_to_sexpr(r) for r in self.rows))
        lines.append("C " + " ".join(label_to_sexpr(c) for c in self.cols))
        for r in range(self.n_rows):
            lines.append("".join("1" if b else "0" for b in self.bits[r]))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "BooleanMatrix":
        lines = text.splitlines()
        if len(lines) < 3:
            raise ValueError("matrix text needs a header and R/C lines")
        m, n = map(int, lines[0].split())
        if not lines[1].startswith("R ") or not lines[2].startswith("C "):
            raise ValueError("expected 'R ...' and 'C ...' label lines")
        rows = parse_labels(lines[1][2:])
        cols = parse_labels(lines[2][2:])
        if len(rows) != m or len(cols) != n:
            raise ValueError("label counts do not match header")
        body = lines[3 : 3 + m]
        if len(body) != m or any(len(line) != n for line in body):
            raise ValueError("bit rows do not match header dimensions")
        bits = [[int(ch) for ch in line] for line in body]
        return BooleanMatrix(rows, cols, bits)


def phi() -> BooleanMatrix:
    """The 1x2 seed matrix [1 0]."""
    return BooleanMatrix([(1, 1)], [1, 2], [[1, 0]])


def extract(
    m: BooleanMatrix, row_sel: Iterable[Label], col_sel: Iterable[Label]
) -> BooleanMatrix:
    """Restriction of ``m`` to the given labels, kept in ``m``'s order."""
    row_sel = set(row_sel)
    col_sel = set(col_sel)
    if not row_sel or not col_sel:
        raise EmptySelection("extraction needs non-empty row and column sets")
    for lab in row_sel:
        if lab not in m.rows:
            raise UnknownLabel(f"row label {lab!r} not in matrix")
    for lab in col_sel:
        if lab not in m.cols:
            raise UnknownLabel(f"column label {lab!r} not in matrix")
    ridx = [i for i, lab in enumerate(m.rows) if lab in row_sel]
    cidx = [j for j, lab in enumerate(m.cols) if lab in col_sel]
    return BooleanMatrix(
        [m.rows[i] for i in ridx],
        [m.cols[j] for j in cidx],
        m.bits[np.ix_(ridx, cidx)],
    )


def transpose(m: BooleanMatrix) -> BooleanMatrix:
    return BooleanMatrix(m.cols, m.rows, m.bits.T)


# ---------------------------------------------------------------------------
# canonical forms

def _dedup_core(col_ints: Sequence[int], n_rows: int):
    """Distinct-column / distinct-row core of a bit matrix.

    Returns (core_cols, core_rows_count, row_mult, col_mult) where
    core_cols are sorted distinct column ints re-indexed onto the kept
    distinct rows.  One dedup pass per axis suffices: removing duplicate
    columns cannot merge distinct rows, and vice versa.
    """
    distinct_cols = sorted(set(col_ints))
    col_mult = {c: 0 for c in distinct_cols}
    for c in col_ints:
        col_mult[c] += 1
    row_pattern = {}
    row_mult = []
    kept_rows = []
    for r in range(n_rows):
        pat = 0
        for j, c in enumerate(distinct_cols):
            pat |= ((c >> r) & 1) << j
        if pat in row_pattern:
            row_mult[row_pattern[pat]] += 1
        else:
            row_pattern[pat] = len(kept_rows)
            kept_rows.append(r)
            row_mult.append(1)
    core_cols = []
    for c in distinct_cols:
        cc = 0
        for i, r in enumerate(kept_rows):
            cc |= ((c >> r) & 1) << i
        core_cols.append(cc)
    return (
        tuple(sorted(set(core_cols))),
        len(kept_rows),
        tuple(row_mult),
        tuple(col_mult[c] for c in distinct_cols),
    )


def _transpose_ints(cols: Sequence[int], n_rows: int) -> tuple[int, ...]:
    out = []
    for r in range(n_rows):
        pat = 0
        for j, c in enumerate(cols):
            pat |= ((c >> r) & 1) << j
        out.append(pat)
    return tuple(out)


def _permute_min(cols: Sequence[int], n_rows: int) -> tuple[int, ...]:
    best = None
    for perm in itertools.permutations(range(n_rows)):
        cand = tuple(
            sorted(
                sum(((c >> src) & 1) << dst for dst, src in enumerate(perm))
                for c in cols
            )
        )
        if best is None or cand < best:
            best = cand
    return best


def _refine_sorted(cols: Sequence[int], n_rows: int) -> tuple[int, ...]:
    # Fallback for wide cores: alternate row/column sorting to a fixpoint.
    # Sound (the result pins an actual matrix) but not a full canonizer.
    cols = tuple(sorted(cols))
    for _ in range(4):
        rows = tuple(sorted(_transpose_ints(cols, n_rows)))
        new_cols = tuple(sorted(_transpose_ints(rows, len(cols))))
        if new_cols == cols:
            break
        cols = new_cols
    return cols


def canonical_key(col_ints: Sequence[int], n_rows: int) -> tuple:
    """Canonical key of the distinct-row/col core, transpose-invariant."""
    cols, nr, _, _ = _dedup_core(col_ints, n_rows)

    def oriented(c, r):
        if r <= _CANON_PERM_LIMIT:
            return (r, len(c), _permute_min(c, r))
        return (r, len(c), _refine_sorted(c, r))

    nc = len(cols)
    if nr < nc:
        return oriented(cols, nr)
    t = tuple(sorted(_transpose_ints(cols, nr)))
    if nc < nr:
        return oriented(t, nc)
    return min(oriented(cols, nr), oriented(t, nc))


@dataclass(frozen=True)
class CanonicalForm:
    """Permutation- and duplication-invariant fingerprint of a matrix.

    Equality and hashing use only the canonical core; the distinct-pattern
    multiplicities of the source matrix are carried for reporting.
    """

    n_distinct_rows: int
    n_distinct_cols: int
    key: tuple
    row_multiplicities: tuple = field(compare=False, default=())
    col_multiplicities: tuple = field(compare=False, default=())


def canonicalize(m: BooleanMatrix) -> CanonicalForm:
    col_ints = m.col_ints()
    core_cols, nr, row_mult, col_mult = _dedup_core(col_ints, m.n_rows)
    return CanonicalForm(
        n_distinct_rows=nr,
        n_distinct_cols=len(core_cols),
        key=canonical_key(col_ints, m.n_rows),
        row_multiplicities=row_mult,
        col_multiplicities=col_mult,
    )


# ---------------------------------------------------------------------------
# rank lower bound

def _rational_rank(bits: np.ndarray) -> int:
    """Rank over the rationals via fraction-free (Bareiss) elimination."""
    rows = sorted(set(map(tuple, bits.tolist())))
    mat = [list(map(int, r)) for r in rows]
    if not mat:
        return 0
    n, m = len(mat), len(mat[0])
    rank = 0
    prev = 1
    for col in range(m):
        pivot = next((r for r in range(rank, n) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        for r in range(rank + 1, n):
            for c in range(col + 1, m):
                mat[r][c] = (mat[rank][col] * mat[r][c] - mat[r][col] * mat[rank][c]) // prev
            mat[r][col] = 0
        prev = mat[rank][col]
        rank += 1
        if rank == n:
            break
    return rank


def real_rank_lower_bound(m: BooleanMatrix) -> int:
    """ceil(log2 rank_Q(m)); always a lower bound on D(m)."""
    r = _rational_rank(m.bits)
    return 0 if r <= 1 else (r - 1).bit_length()


# ---------------------------------------------------------------------------
# subgame testing

@dataclass(frozen=True)
class SubgameWitness:
    row_map: tuple  # (label in A, label in B) pairs
    col_map: tuple


def find_subgame(
    a: BooleanMatrix, b: BooleanMatrix, node_cap: int = 1_000_000
) -> SubgameWitness | None:
    """Exhaustively search for A as a subgame of B (select + rearrange).

    Returns a witness or None.  Raises BudgetExceeded when the node cap is
    hit, which callers must treat as "unknown", not as false.
    """
    if a.n_rows > b.n_rows or a.n_cols > b.n_cols:
        return None
    a_rows = _transpose_ints(a.col_ints(), a.n_rows)
    b_rows = _transpose_ints(b.col_ints(), b.n_rows)
    a_cols = a.col_ints()
    nodes = 0

    # candidate B-rows per A-row: must carry enough ones and zeros
    def weight(x):
        return bin(x).count("1")

    b_row_w = [(weight(r), b.n_cols - weight(r)) for r in b_rows]
    cand = []
    for i, ar in enumerate(a_rows):
        w1 = weight(ar)
        w0 = a.n_cols - w1
        cand.append([j for j in range(b.n_rows) if b_row_w[j][0] >= w1 and b_row_w[j][1] >= w0])

    order = sorted(range(a.n_rows), key=lambda i: len(cand[i]))
    assignment: dict[int, int] = {}

    def columns_match(row_assignment: dict[int, int]) -> list[int] | None:
        # For the fixed row map, columns partition by pattern; a column
        # map exists iff every needed pattern has enough supply in B.
        need: dict[int, list[int]] = {}
        for j, c in enumerate(a_cols):
            need.setdefault(c, []).append(j)
        supply: dict[int, list[int]] = {}
        for j in range(b.n_cols):
            pat = 0
            for arow in range(a.n_rows):
                pat |= int(b.bits[row_assignment[arow], j]) << arow
            supply.setdefault(pat, []).append(j)
        col_map = [None] * a.n_cols
        for pat, needers in need.items():
            avail = supply.get(pat, [])
            if len(avail) < len(needers):
                return None
            for k, j in enumerate(needers):
                col_map[j] = avail[k]
        return col_map

    def backtrack(k: int) -> SubgameWitness | None:
        nonlocal nodes
        if k == a.n_rows:
            col_map = columns_match(assignment)
            if col_map is None:
                return None
            return SubgameWitness(
                row_map=tuple((a.rows[i], b.rows[assignment[i]]) for i in range(a.n_rows)),
                col_map=tuple((a.cols[j], b.cols[col_map[j]]) for j in range(a.n_cols)),
            )
        i = order[k]
        for j in cand[i]:
            if j in assignment.values():
                continue
            nodes += 1
            if nodes > node_cap:
                raise BudgetExceeded(f"subgame search exceeded {node_cap} nodes")
            assignment[i] = j
            found = backtrack(k + 1)
            if found is not None:
                return found
            del assignment[i]
        return None

    return backtrack(0)


def is_subgame(a: BooleanMatrix, b: BooleanMatrix, node_cap: int = 1_000_000) -> bool:
    return find_subgame(a, b, node_cap=node_cap) is not None
