"""Nonsingular submatrices with prescribed per-block row and column counts.

A :class:`BlockInstance` partitions the rows of ``G`` into blocks S_0..S_{m-1}
and the columns into T_0..T_{n-1}, and asks for s_i rows from S_i and t_j
columns from T_j (Σ s_i = Σ t_j = R) forming a nonsingular R×R submatrix.
Such a choice exists iff for every set I of row blocks and K of column blocks

    rank(G(∪_{i∈I} S_i, ∪_{k∈K} T_k)) >= Σ_{i∈I} s_i + Σ_{k∈K} t_k - R.

Block indices are 0-based everywhere in this package.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Sequence

from .exact_linalg import (
    ExactMatrix,
    FieldSpec,
    Scalar,
    determinant,
    is_nonsingular,
    rank,
    submatrix,
    transpose,
)
from .matroid_core import kung_oracle, rado_hall_feasible

__all__ = [
    "PartitionError",
    "QuotaMismatch",
    "TooManyBlocks",
    "SearchSpaceTooLarge",
    "InternalInconsistency",
    "BlockInstance",
    "Selection",
    "Violation",
    "ConditionResult",
    "Certificate",
    "SelectionCheck",
    "check_conditions",
    "extract_witness",
    "verify_selection",
    "brute_force_solve",
    "rado_hall_on_kung",
    "random_instance",
    "transpose_instance",
    "recheck_certificate",
]

MAX_BLOCKS = 24
BRUTE_FORCE_LIMIT = 10**7


class PartitionError(ValueError):
    pass


class QuotaMismatch(ValueError):
    pass


class TooManyBlocks(ValueError):
    pass


class SearchSpaceTooLarge(ValueError):
    pass


class InternalInconsistency(RuntimeError):
    pass


def _as_partition(blocks: Sequence[Sequence[int]], size: int, what: str) -> tuple[tuple[int, ...], ...]:
    seen: dict[int, int] = {}
    out = []
    for k, block in enumerate(blocks):
        block = tuple(sorted(block))
        for x in block:
            if not 0 <= x < size:
                raise PartitionError(f"{what} {x} in block {k} is out of range 0..{size - 1}")
            if x in seen:
                raise PartitionError(f"{what} {x} appears in blocks {seen[x]} and {k}")
            seen[x] = k
        out.append(block)
    missing = [x for x in range(size) if x not in seen]
    if missing:
        raise PartitionError(f"{what}s {missing} are not in any block")
    return tuple(out)


@dataclass(frozen=True)
class BlockInstance:
    G: ExactMatrix
    row_blocks: tuple
    col_blocks: tuple
    row_quotas: tuple
    col_quotas: tuple

    def __post_init__(self):
        rb = _as_partition(self.row_blocks, self.G.n_rows, "row")
        cb = _as_partition(self.col_blocks, self.G.n_cols, "column")
        rq, cq = tuple(self.row_quotas), tuple(self.col_quotas)
        if len(rq) != len(rb):
            raise PartitionError(f"{len(rb)} row blocks but {len(rq)} row quotas")
        if len(cq) != len(cb):
            raise PartitionError(f"{len(cb)} column blocks but {len(cq)} column quotas")
        if any(not isinstance(q, int) or q < 0 for q in rq + cq):
            raise ValueError("quotas must be nonnegative integers")
        if sum(rq) != sum(cq):
            raise QuotaMismatch(f"row quotas sum to {sum(rq)} but column quotas sum to {sum(cq)}")
        object.__setattr__(self, "row_blocks", rb)
        object.__setattr__(self, "col_blocks", cb)
        object.__setattr__(self, "row_quotas", rq)
        object.__setattr__(self, "col_quotas", cq)

    @property
    def R(self) -> int:
        return sum(self.row_quotas)

    @property
    def m(self) -> int:
        return len(self.row_blocks)

    @property
    def n(self) -> int:
        return len(self.col_blocks)


@dataclass(frozen=True)
class Selection:
    row_picks: tuple
    col_picks: tuple

    def __post_init__(self):
        object.__setattr__(self, "row_picks", tuple(tuple(sorted(p)) for p in self.row_picks))
        object.__setattr__(self, "col_picks", tuple(tuple(sorted(p)) for p in self.col_picks))

    @property
    def rows(self) -> list[int]:
        return sorted(x for p in self.row_picks for x in p)

    @property
    def cols(self) -> list[int]:
        return sorted(x for p in self.col_picks for x in p)


@dataclass(frozen=True)
class Violation:
    I: tuple
    K: tuple
    lhs: int
    rhs: int


@dataclass(frozen=True)
class ConditionResult:
    feasible: bool
    violation: Violation | None = None


@dataclass(frozen=True)
class Certificate:
    """Either ``selection`` + ``determinant`` (feasible) or ``violation``."""

    feasible: bool
    selection: Selection | None = None
    determinant: Scalar | None = None
    violation: Violation | None = None


class _RankCache:
    """Memoised rank(G(rows, cols)) keyed by (row mask, column mask)."""

    def __init__(self, G: ExactMatrix):
        self.G = G
        self._cache: dict[tuple[int, int], int] = {}

    def __call__(self, rows: Sequence[int], cols: Sequence[int]) -> int:
        key = (sum(1 << i for i in rows), sum(1 << j for j in cols))
        r = self._cache.get(key)
        if r is None:
            r = self._cache[key] = rank(submatrix(self.G, rows, cols))
        return r


def _check_block_count(inst: BlockInstance) -> None:
    # only positive-quota blocks are enumerated
    active = sum(q > 0 for q in inst.row_quotas) + sum(q > 0 for q in inst.col_quotas)
    if active > MAX_BLOCKS:
        raise TooManyBlocks(f"{active} blocks with positive quota exceed the cap of {MAX_BLOCKS}")


def _subset_sums(blocks, quotas, active):
    """For every bitmask over ``active``: (block indices, members, quota total)."""
    out = []
    for mask in range(1 << len(active)):
        idx = [active[b] for b in range(len(active)) if mask >> b & 1]
        members = [x for k in idx for x in blocks[k]]
        out.append((tuple(idx), members, sum(quotas[k] for k in idx)))
    return out


def check_conditions(inst: BlockInstance, _ranks: _RankCache | None = None) -> ConditionResult:
    """Evaluate the rank condition for every (I, K), I-bitmask major.

    Blocks with zero quota are left out of I and K; including one only
    enlarges the left side.  Returns the first violation found.
    """
    _check_block_count(inst)
    ranks = _ranks or _RankCache(inst.G)
    R = inst.R
    act_r = [i for i, q in enumerate(inst.row_quotas) if q > 0]
    act_c = [k for k, q in enumerate(inst.col_quotas) if q > 0]
    col_sets = _subset_sums(inst.col_blocks, inst.col_quotas, act_c)
    for I, rows, s_sum in _subset_sums(inst.row_blocks, inst.row_quotas, act_r):
        for K, cols, t_sum in col_sets:
            need = s_sum + t_sum - R
            if need <= 0:
                continue
            have = ranks(rows, cols)
            if have < need:
                return ConditionResult(False, Violation(I, K, have, need))
    return ConditionResult(True)


def _refined(inst: BlockInstance, fixed_rows: list[int], fixed_cols: list[int]) -> BlockInstance:
    """Merge the committed rows/columns into one extra fully-demanded block per side."""

    def split(blocks, quotas, fixed):
        fixed_set = set(fixed)
        new_blocks = [[x for x in b if x not in fixed_set] for b in blocks]
        new_quotas = [q - sum(x in fixed_set for x in b) for b, q in zip(blocks, quotas)]
        return new_blocks + [sorted(fixed)], new_quotas + [len(fixed)]

    rb, rq = split(inst.row_blocks, inst.row_quotas, fixed_rows)
    cb, cq = split(inst.col_blocks, inst.col_quotas, fixed_cols)
    return BlockInstance(inst.G, rb, cb, rq, cq)


def extract_witness(inst: BlockInstance) -> Certificate:
    """Decide the instance and return a certificate for the verdict.

    Feasible instances are solved by self-reduction: rows are committed one
    at a time (lowest residual block first, lowest index first), keeping a
    row only if the instance with that row forced in is still feasible;
    columns follow the same way.  Each forced instance is again a block
    instance with one extra block per side, so the rank conditions decide it.
    """
    ranks = _RankCache(inst.G)
    verdict = check_conditions(inst, ranks)
    if not verdict.feasible:
        return Certificate(False, violation=verdict.violation)

    fixed_rows: list[int] = []
    fixed_cols: list[int] = []
    for blocks, quotas, fixed, is_row in (
        (inst.row_blocks, inst.row_quotas, fixed_rows, True),
        (inst.col_blocks, inst.col_quotas, fixed_cols, False),
    ):
        for block, quota in zip(blocks, quotas):
            taken = 0
            for x in block:
                if taken == quota:
                    break
                fixed.append(x)
                trial = _refined(inst, fixed_rows, fixed_cols)
                if check_conditions(trial, ranks).feasible:
                    taken += 1
                else:
                    fixed.pop()
            if taken != quota:
                raise InternalInconsistency(
                    f"no {'row' if is_row else 'column'} of block {block} extends the partial witness"
                )

    def picks(blocks, fixed):
        fixed = set(fixed)
        return [[x for x in b if x in fixed] for b in blocks]

    sel = Selection(picks(inst.row_blocks, fixed_rows), picks(inst.col_blocks, fixed_cols))
    sub = submatrix(inst.G, sel.rows, sel.cols)
    if not is_nonsingular(sub):
        raise InternalInconsistency("self-reduction produced a singular submatrix")
    return Certificate(True, selection=sel, determinant=determinant(sub))


@dataclass(frozen=True)
class SelectionCheck:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_selection(inst: BlockInstance, sel: Selection) -> SelectionCheck:
    """Check block membership, per-block counts and nonsingularity of a selection.

    Failure reasons: ``block_count``, ``not_in_block``, ``cardinality``, ``singular``.
    """
    if len(sel.row_picks) != inst.m or len(sel.col_picks) != inst.n:
        return SelectionCheck(False, "block_count")
    for picks, blocks, quotas in (
        (sel.row_picks, inst.row_blocks, inst.row_quotas),
        (sel.col_picks, inst.col_blocks, inst.col_quotas),
    ):
        for p, b, q in zip(picks, blocks, quotas):
            if not set(p) <= set(b):
                return SelectionCheck(False, "not_in_block")
            if len(set(p)) != len(p) or len(p) != q:
                return SelectionCheck(False, "cardinality")
    if not is_nonsingular(submatrix(inst.G, sel.rows, sel.cols)):
        return SelectionCheck(False, "singular")
    return SelectionCheck(True)


def brute_force_solve(inst: BlockInstance, limit: int = BRUTE_FORCE_LIMIT) -> Selection | None:
    """First block-respecting selection (in lexicographic combination order)
    whose submatrix is nonsingular, or None."""
    groups = [(b, q) for b, q in zip(inst.row_blocks, inst.row_quotas)]
    groups += [(b, q) for b, q in zip(inst.col_blocks, inst.col_quotas)]
    space = math.prod(math.comb(len(b), q) for b, q in groups)
    if space > limit:
        raise SearchSpaceTooLarge(f"{space} candidate selections exceed the limit of {limit}")
    if space == 0:
        return None
    m = inst.m
    for combo in itertools.product(*(itertools.combinations(b, q) for b, q in groups)):
        rows = sorted(x for c in combo[:m] for x in c)
        cols = sorted(x for c in combo[m:] for x in c)
        if is_nonsingular(submatrix(inst.G, rows, cols)):
            return Selection(combo[:m], combo[m:])
    return None


@dataclass(frozen=True)
class KungVerdict:
    feasible: bool
    violating_union: dict | None = None


def rado_hall_on_kung(inst: BlockInstance) -> KungVerdict:
    """Decide the instance through the matroid on rows ∪ columns.

    Row block S_i gets quota s_i and column block T_j gets |T_j| - t_j: the
    columns left out of the selection.  An independent set meeting those
    quotas is exactly a nonsingular selection.
    """
    _check_block_count(inst)
    for j, (b, t) in enumerate(zip(inst.col_blocks, inst.col_quotas)):
        if t > len(b):
            return KungVerdict(False, {"reason": "column_quota_exceeds_block", "col_block": j,
                                       "quota": t, "size": len(b)})
    oracle = kung_oracle(inst.G)
    families = [[f"row{i}" for i in b] for b in inst.row_blocks]
    families += [[f"col{j}" for j in b] for b in inst.col_blocks]
    quotas = list(inst.row_quotas) + [len(b) - t for b, t in zip(inst.col_blocks, inst.col_quotas)]
    res = rado_hall_feasible(oracle, families, quotas)
    if res.feasible:
        return KungVerdict(True)
    m = inst.m
    return KungVerdict(False, {
        "row_blocks": [i for i in res.violating_I if i < m],
        "col_blocks": [i - m for i in res.violating_I if i >= m],
        "lhs": res.lhs,
        "rhs": res.rhs,
    })


def transpose_instance(inst: BlockInstance) -> BlockInstance:
    return BlockInstance(transpose(inst.G), inst.col_blocks, inst.row_blocks,
                         inst.col_quotas, inst.row_quotas)


def _spread(rng: random.Random, total: int, owner: list[int], parts: int) -> list[int]:
    """Hand out ``total`` units, each to the block of a uniformly drawn element.

    Draws are with replacement, so a block can end up asking for more
    elements than it has.
    """
    out = [0] * parts
    for _ in range(total):
        out[rng.choice(owner)] += 1
    return out


def random_instance(
    seed: int,
    field: FieldSpec,
    max_rows: int,
    max_cols: int,
    max_row_blocks: int,
    max_col_blocks: int,
) -> BlockInstance:
    """Seeded random instance; quotas may exceed block sizes (those decide infeasible)."""
    if min(max_rows, max_cols, max_row_blocks, max_col_blocks) < 1:
        raise ValueError("all bounds must be positive")
    rng = random.Random(seed)
    nr, nc = rng.randint(1, max_rows), rng.randint(1, max_cols)
    m, n = rng.randint(1, max_row_blocks), rng.randint(1, max_col_blocks)
    row_of = [rng.randrange(m) for _ in range(nr)]
    col_of = [rng.randrange(n) for _ in range(nc)]
    if field.is_prime_field:
        data = [rng.randrange(field.p) for _ in range(nr * nc)]
    else:
        data = [rng.randint(-5, 5) for _ in range(nr * nc)]
    G = ExactMatrix(field, nr, nc, tuple(data))
    R = rng.randint(0, min(nr, nc))
    return BlockInstance(
        G,
        [[x for x in range(nr) if row_of[x] == k] for k in range(m)],
        [[x for x in range(nc) if col_of[x] == k] for k in range(n)],
        _spread(rng, R, row_of, m),
        _spread(rng, R, col_of, n),
    )


def recheck_certificate(inst: BlockInstance, cert: Certificate) -> bool:
    """Re-verify a certificate against ``inst`` with fresh rank computations."""
    if cert.feasible:
        if cert.selection is None or not verify_selection(inst, cert.selection):
            return False
        det = determinant(submatrix(inst.G, cert.selection.rows, cert.selection.cols))
        return cert.determinant is None or det == cert.determinant
    v = cert.violation
    if v is None:
        return False
    if any(not 0 <= i < inst.m for i in v.I) or any(not 0 <= k < inst.n for k in v.K):
        return False
    rows = [x for i in v.I for x in inst.row_blocks[i]]
    cols = [x for k in v.K for x in inst.col_blocks[k]]
    lhs = rank(submatrix(inst.G, rows, cols))
    rhs = sum(inst.row_quotas[i] for i in set(v.I)) + sum(inst.col_quotas[k] for k in set(v.K)) - inst.R
    return lhs == v.lhs and rhs == v.rhs and lhs < rhs
