"""Exact deterministic communication complexity with protocol certificates.

D(M) is the minimum depth of a protocol tree whose leaves are
monochromatic rectangles; the answer bit is not counted separately, so
D(constant) = 0 and D([1 0]) = 1.

decide(M, b) performs memoized branch-and-bound over row/column
bipartitions of the distinct-pattern core of the current rectangle
(duplicates are bound to their representative, the first distinct row
or column is fixed into the left part).  Two sound prunes apply:

* rank: ceil(log2 rank_Q) <= D, so b below the bound is an instant no;
* distinct-pattern counts: a depth-b protocol matrix has at most g(b)
  distinct columns (and rows) where g(0)=1 and g(b) =
  max(2*g(b-1), g(b-1)^2) - a column split adds the children's counts,
  a row split multiplies them.  The same recurrence also caps which
  split classes can possibly succeed, which keeps the enumeration of
  2^(n-1) bipartitions confined to narrow cores.

solve_exact runs iterative deepening from the best lower bound, then
rebuilds an explicit certificate by re-walking the (now memoized)
search.  verify_protocol checks a certificate against the matrix
without consulting the solver.  naive_reference is the independent
ground-truth oracle: plain recursive search over all bipartitions with
no memo and no pruning, guarded to tiny instances.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import BudgetExceeded, GuardExceeded, MalformedTree
from .labels import label_to_sexpr, parse_label
from .matrix import BooleanMatrix, _dedup_core, _rational_rank, canonical_key

_COUNT_BOUND = (1, 2, 4, 16, 256, 65536)  # g(0)..g(5); unbounded beyond


def _g(b: int) -> Optional[int]:
    if b < 0:
        return 0
    if b < len(_COUNT_BOUND):
        return _COUNT_BOUND[b]
    return None


def count_lower_bound(n_distinct_rows: int, n_distinct_cols: int) -> int:
    """Smallest b with g(b) >= both distinct counts."""
    need = max(n_distinct_rows, n_distinct_cols)
    b = 0
    while _g(b) is not None and _g(b) < need:
        b += 1
    return b


@dataclass(frozen=True)
class Leaf:
    value: int

    @property
    def depth(self) -> int:
        return 0


@dataclass(frozen=True)
class Internal:
    speaker: str  # "row" or "col"
    left_labels: tuple
    right_labels: tuple
    left: "ProtocolTree"
    right: "ProtocolTree"

    @property
    def depth(self) -> int:
        return 1 + max(self.left.depth, self.right.depth)


ProtocolTree = Union[Leaf, Internal]


@dataclass
class SolveStats:
    nodes_expanded: int = 0
    memo_hits: int = 0
    rank_prunes: int = 0
    count_prunes: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class SolveResult:
    value: int
    certificate: ProtocolTree
    stats: SolveStats


class Solver:
    """Shared-memo exact solver; safe to reuse across many matrices."""

    def __init__(self, node_cap: int = 100_000_000, enum_cap: int = 1 << 24):
        self.node_cap = node_cap
        self.enum_cap = enum_cap
        self.stats = SolveStats()
        self._memo: dict = {}  # canonical key -> [max_false_b, min_true_b]
        self._rank: dict = {}  # canonical key -> rank lower bound
        self._canon: dict = {}  # state -> canonical key

    # -- state plumbing ----------------------------------------------------

    @staticmethod
    def _state_of(m: BooleanMatrix):
        cols, nr, _, _ = _dedup_core(m.col_ints(), m.n_rows)
        return (cols, nr)

    def _canon_of(self, state):
        key = self._canon.get(state)
        if key is None:
            key = canonical_key(state[0], state[1])
            self._canon[state] = key
        return key

    def _rank_bound(self, state, canon) -> int:
        lb = self._rank.get(canon)
        if lb is None:
            cols, nr = state
            rows = [[(c >> r) & 1 for c in cols] for r in range(nr)]
            rank = _rational_rank(np.array(rows, dtype=np.uint8))
            lb = 0 if rank <= 1 else (rank - 1).bit_length()
            self._rank[canon] = lb
        return lb

    @staticmethod
    def _child_of_cols(cols_subset, nrows):
        return _dedup_core(cols_subset, nrows)[:2]

    @staticmethod
    def _child_of_rows(cols, row_positions):
        projected = []
        for c in cols:
            cc = 0
            for i, r in enumerate(row_positions):
                cc |= ((c >> r) & 1) << i
            projected.append(cc)
        return _dedup_core(projected, len(row_positions))[:2]

    # -- decision procedure -------------------------------------------------

    def decide(self, m: BooleanMatrix, budget: int) -> bool:
        return self._decide(self._state_of(m), budget)

    def _decide(self, state, b: int) -> bool:
        cols, nr = state
        nc = len(cols)
        if nr == 1 and nc == 1:
            return True  # constant rectangle
        if b <= 0:
            return False
        gb = _g(b)
        if gb is not None and (nr > gb or nc > gb):
            self.stats.count_prunes += 1
            return False
        canon = self._canon_of(state)
        entry = self._memo.get(canon)
        if entry is not None:
            max_false, min_true = entry
            if min_true is not None and b >= min_true:
                self.stats.memo_hits += 1
                return True
            if max_false is not None and b <= max_false:
                self.stats.memo_hits += 1
                return False
        else:
            entry = self._memo[canon] = [None, None]
        if self._rank_bound(state, canon) > b:
            self.stats.rank_prunes += 1
            entry[0] = max(entry[0] or 0, b)
            return False
        self.stats.nodes_expanded += 1
        if self.stats.nodes_expanded > self.node_cap:
            raise BudgetExceeded(f"solver exceeded node cap {self.node_cap}")

        # A row split caps distinct rows at 2*g(b-1) (parts add) and
        # distinct cols at g(b-1)^2 (patterns pair up); columns dually.
        gchild = _g(b - 1)
        moves = []
        if gchild is None or (nr <= 2 * gchild and nc <= gchild * gchild):
            moves.append(("row", (1 << (nr - 1)) - 1 if nr > 1 else 0))
        if gchild is None or (nc <= 2 * gchild and nr <= gchild * gchild):
            moves.append(("col", (1 << (nc - 1)) - 1 if nc > 1 else 0))
        moves.sort(key=lambda mv: mv[1])
        incomplete = False
        result = False
        for axis, n_splits in moves:
            if n_splits == 0:
                continue
            if n_splits > self.enum_cap:
                incomplete = True
                continue
            if axis == "row":
                rest = list(range(1, nr))
                for mask in range(n_splits):
                    left = [0]
                    right = []
                    for i, r in enumerate(rest):
                        (left if (mask >> i) & 1 else right).append(r)
                    if self._decide(self._child_of_rows(cols, left), b - 1) and self._decide(
                        self._child_of_rows(cols, right), b - 1
                    ):
                        result = True
                        break
            else:
                rest = cols[1:]
                for mask in range(n_splits):
                    left = [cols[0]]
                    right = []
                    for i, c in enumerate(rest):
                        (left if (mask >> i) & 1 else right).append(c)
                    if self._decide(self._child_of_cols(left, nr), b - 1) and self._decide(
                        self._child_of_cols(right, nr), b - 1
                    ):
                        result = True
                        break
            if result:
                break
        if result:
            entry[1] = b if entry[1] is None else min(entry[1], b)
            return True
        if incomplete:
            raise BudgetExceeded("split enumeration exceeded the enum cap")
        entry[0] = b if entry[0] is None else max(entry[0], b)
        return False

    # -- exact solve and certificates ----------------------------------------

    def solve_exact(self, m: BooleanMatrix) -> SolveResult:
        start = time.perf_counter()
        state = self._state_of(m)
        canon = self._canon_of(state)
        lb = max(
            count_lower_bound(state[1], len(state[0])),
            self._rank_bound(state, canon),
        )
        b = lb
        while not self._decide(state, b):
            b += 1
        tree = self._build_tree(m, tuple(range(m.n_rows)), tuple(range(m.n_cols)), b)
        self.stats.wall_time += time.perf_counter() - start
        return SolveResult(value=b, certificate=tree, stats=self.stats)

    def _rect_patterns(self, m: BooleanMatrix, ridx, cidx):
        bits = m.bits
        col_pat = []
        for c in cidx:
            v = 0
            for i, r in enumerate(ridx):
                v |= int(bits[r, c]) << i
            col_pat.append(v)
        return col_pat

    def _build_tree(self, m: BooleanMatrix, ridx, cidx, b: int) -> ProtocolTree:
        col_pat = self._rect_patterns(m, ridx, cidx)
        full = (1 << len(ridx)) - 1
        if all(v == 0 for v in col_pat):
            return Leaf(0)
        if all(v == full for v in col_pat):
            return Leaf(1)
        cols, nr = _dedup_core(col_pat, len(ridx))[:2]
        nc = len(cols)
        # distinct row patterns of the rectangle, for label partitioning
        row_pat = []
        dcols = sorted(set(col_pat))
        for i in range(len(ridx)):
            v = 0
            for j, c in enumerate(dcols):
                v |= ((c >> i) & 1) << j
            row_pat.append(v)
        drows = sorted(set(row_pat))

        gchild = _g(b - 1)
        moves = []
        if gchild is None or (nr <= 2 * gchild and nc <= gchild * gchild):
            moves.append(("row", drows))
        if gchild is None or (nc <= 2 * gchild and nr <= gchild * gchild):
            moves.append(("col", dcols))
        moves.sort(key=lambda mv: len(mv[1]))
        for axis, patterns in moves:
            k = len(patterns)
            if k < 2:
                continue
            rest = patterns[1:]
            for mask in range((1 << (k - 1)) - 1):
                left_set = {patterns[0]}
                for i in range(k - 1):
                    if (mask >> i) & 1:
                        left_set.add(rest[i])
                if axis == "row":
                    lrows = tuple(r for r, p in zip(ridx, row_pat) if p in left_set)
                    rrows = tuple(r for r, p in zip(ridx, row_pat) if p not in left_set)
                    lchild = self._child_of_rows(
                        col_pat, [i for i, p in enumerate(row_pat) if p in left_set]
                    )
                    rchild = self._child_of_rows(
                        col_pat, [i for i, p in enumerate(row_pat) if p not in left_set]
                    )
                    if self._decide(lchild, b - 1) and self._decide(rchild, b - 1):
                        return Internal(
                            speaker="row",
                            left_labels=tuple(m.rows[r] for r in lrows),
                            right_labels=tuple(m.rows[r] for r in rrows),
                            left=self._build_tree(m, lrows, cidx, b - 1),
                            right=self._build_tree(m, rrows, cidx, b - 1),
                        )
                else:
                    lcols = tuple(c for c, p in zip(cidx, col_pat) if p in left_set)
                    rcols = tuple(c for c, p in zip(cidx, col_pat) if p not in left_set)
                    lchild = self._child_of_cols([p for p in col_pat if p in left_set], len(ridx))
                    rchild = self._child_of_cols(
                        [p for p in col_pat if p not in left_set], len(ridx)
                    )
                    if self._decide(lchild, b - 1) and self._decide(rchild, b - 1):
                        return Internal(
                            speaker="col",
                            left_labels=tuple(m.cols[c] for c in lcols),
                            right_labels=tuple(m.cols[c] for c in rcols),
                            left=self._build_tree(m, ridx, lcols, b - 1),
                            right=self._build_tree(m, ridx, rcols, b - 1),
                        )
        raise AssertionError("decide said feasible but no split was found")


def decide(m: BooleanMatrix, budget: int, node_cap: int = 100_000_000) -> bool:
    return Solver(node_cap=node_cap).decide(m, budget)


def solve_exact(m: BooleanMatrix, node_cap: int = 100_000_000) -> SolveResult:
    return Solver(node_cap=node_cap).solve_exact(m)


# ---------------------------------------------------------------------------
# certificate checking (independent of the solver)

def verify_protocol(m: BooleanMatrix, tree: ProtocolTree) -> bool:
    """Walk the tree; True iff every leaf rectangle is constant and correct.

    Structural violations (parts that do not partition the speaker side)
    raise MalformedTree with the failing node path; semantic mismatches
    return False.
    """
    ridx = {lab: i for i, lab in enumerate(m.rows)}
    cidx = {lab: j for j, lab in enumerate(m.cols)}

    def walk(node, rows, cols, path) -> bool:
        if isinstance(node, Leaf):
            want = node.value
            for r in rows:
                for c in cols:
                    if int(m.bits[ridx[r], cidx[c]]) != want:
                        return False
            return True
        if not isinstance(node, Internal):
            raise MalformedTree("unknown node type", path)
        current = rows if node.speaker == "row" else cols
        left = set(node.left_labels)
        right = set(node.right_labels)
        if not left or not right:
            raise MalformedTree("empty part", path)
        if left & right:
            raise MalformedTree("parts overlap", path)
        if left | right != set(current):
            raise MalformedTree("parts do not cover the rectangle side", path)
        lseq = tuple(x for x in current if x in left)
        rseq = tuple(x for x in current if x in right)
        if node.speaker == "row":
            return walk(node.left, lseq, cols, path + (0,)) and walk(
                node.right, rseq, cols, path + (1,)
            )
        return walk(node.left, rows, lseq, path + (0,)) and walk(
            node.right, rows, rseq, path + (1,)
        )

    return walk(tree, m.rows, m.cols, ())


# ---------------------------------------------------------------------------
# naive reference oracle

_NAIVE_MAX_ROWS = 4
_NAIVE_MAX_COLS = 16


def naive_reference(m: BooleanMatrix) -> int:
    """Plain recursive search over all bipartitions; no memo, no pruning.

    Hard-guarded to at most 4 distinct rows and 16 distinct columns;
    used in tests as independent ground truth for solve_exact.
    """
    col_ints = m.col_ints()
    distinct_cols = len(set(col_ints))
    row_ints = set()
    for r in range(m.n_rows):
        row_ints.add(tuple(int(b) for b in m.bits[r]))
    if len(row_ints) > _NAIVE_MAX_ROWS or distinct_cols > _NAIVE_MAX_COLS:
        raise GuardExceeded(
            f"naive oracle guard is {_NAIVE_MAX_ROWS}x{_NAIVE_MAX_COLS} distinct"
        )

    n_rows = m.n_rows

    def constant(rmask: int, cols: tuple) -> bool:
        val = None
        for c in cols:
            v = col_ints[c] & rmask
            if v != 0 and v != rmask:
                return False
            bit = 0 if v == 0 else 1
            if val is None:
                val = bit
            elif val != bit:
                return False
        return True

    def dec(rmask: int, cols: tuple, b: int) -> bool:
        if constant(rmask, cols):
            return True
        if b == 0:
            return False
        rows = [r for r in range(n_rows) if (rmask >> r) & 1]
        if len(rows) > 1:
            first = rows[0]
            rest = rows[1:]
            for mask in range((1 << len(rest)) - 1):
                lmask = 1 << first
                for i, r in enumerate(rest):
                    if (mask >> i) & 1:
                        lmask |= 1 << r
                if dec(lmask, cols, b - 1) and dec(rmask ^ lmask, cols, b - 1):
                    return True
        if len(cols) > 1:
            rest = cols[1:]
            for mask in range((1 << len(rest)) - 1):
                lcols = [cols[0]]
                rcols = []
                for i, c in enumerate(rest):
                    (lcols if (mask >> i) & 1 else rcols).append(c)
                if dec(rmask, tuple(lcols), b - 1) and dec(rmask, tuple(rcols), b - 1):
                    return True
        return False

    rmask0 = (1 << n_rows) - 1
    cols0 = tuple(range(m.n_cols))
    b = 0
    while not dec(rmask0, cols0, b):
        b += 1
    return b


# ---------------------------------------------------------------------------
# certificate file format: s-expression with explicit label sets

def tree_to_sexpr(tree: ProtocolTree) -> str:
    if isinstance(tree, Leaf):
        return f"(leaf {tree.value})"
    left = " ".join(label_to_sexpr(x) for x in tree.left_labels)
    right = " ".join(label_to_sexpr(x) for x in tree.right_labels)
    return (
        f"({tree.speaker} ({left}) ({right}) "
        f"{tree_to_sexpr(tree.left)} {tree_to_sexpr(tree.right)})"
    )


def tree_from_sexpr(text: str) -> ProtocolTree:
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def parse_node():
        nonlocal pos
        skip_ws()
        if text[pos] != "(":
            raise ValueError("expected '('")
        pos += 1
        skip_ws()
        word = []
        while pos < len(text) and not text[pos].isspace() and text[pos] not in "()":
            word.append(text[pos])
            pos += 1
        word = "".join(word)
        if word == "leaf":
            skip_ws()
            val = []
            while pos < len(text) and text[pos] not in ") \t\n":
                val.append(text[pos])
                pos += 1
            skip_ws()
            if text[pos] != ")":
                raise ValueError("expected ')' after leaf value")
            pos += 1
            return Leaf(int("".join(val)))
        if word not in ("row", "col"):
            raise ValueError(f"bad speaker {word!r}")
        left_labels = parse_group()
        right_labels = parse_group()
        left = parse_node()
        right = parse_node()
        skip_ws()
        if text[pos] != ")":
            raise ValueError("expected ')' closing internal node")
        pos += 1
        return Internal(word, left_labels, right_labels, left, right)

    def parse_group():
        nonlocal pos
        skip_ws()
        if text[pos] != "(":
            raise ValueError("expected '(' opening a label group")
        depth = 0
        start = pos
        while pos < len(text):
            if text[pos] == "(":
                depth += 1
            elif text[pos] == ")":
                depth -= 1
                if depth == 0:
                    pos += 1
                    inner = text[start + 1 : pos - 1]
                    out = []
                    buf = []
                    d = 0
                    for ch in inner:
                        if ch == "(":
                            d += 1
                        elif ch == ")":
                            d -= 1
                        if ch.isspace() and d == 0:
                            if buf:
                                out.append(parse_label("".join(buf)))
                                buf = []
                        else:
                            buf.append(ch)
                    if buf:
                        out.append(parse_label("".join(buf)))
                    return tuple(out)
            pos += 1
        raise ValueError("unbalanced label group")

    node = parse_node()
    return node
