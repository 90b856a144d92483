"""Rank-oracle matroids, matrix bimatroids and their axiom checkers.

Subsets of a ground set are handled internally as bitmasks over the fixed
ground order; enumeration is always in ascending bitmask order, which is
what "first violation" means throughout this module.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .exact_linalg import ExactMatrix, IndexOutOfRange, rank, submatrix

__all__ = [
    "GroundTooLarge",
    "ElementNotInGround",
    "FamiliesNotDisjoint",
    "TooManyFamilies",
    "GroundSet",
    "RankOracle",
    "AxiomViolation",
    "AxiomReport",
    "RadoHallResult",
    "MATROID_EXHAUSTIVE_CAP",
    "BIMATROID_EXHAUSTIVE_CAP",
    "RADO_HALL_MAX_FAMILIES",
    "verify_matroid_axioms",
    "is_independent",
    "kung_rank",
    "kung_oracle",
    "linking_rank",
    "verify_bimatroid_axioms",
    "verify_rank_exchange",
    "rado_hall_feasible",
]

MATROID_EXHAUSTIVE_CAP = 12
BIMATROID_EXHAUSTIVE_CAP = 5
RADO_HALL_MAX_FAMILIES = 20
# violations beyond this many are counted but not stored
MAX_STORED_VIOLATIONS = 100


class GroundTooLarge(ValueError):
    pass


class ElementNotInGround(KeyError):
    pass


class FamiliesNotDisjoint(ValueError):
    pass


class TooManyFamilies(ValueError):
    pass


class NondeterministicOracle(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundSet:
    elements: tuple

    def __post_init__(self):
        elements = tuple(self.elements)
        if len(set(elements)) != len(elements):
            raise ValueError("ground set labels must be distinct")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "_pos", {e: i for i, e in enumerate(elements)})

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def mask(self, subset: Iterable[Hashable]) -> int:
        m = 0
        for e in subset:
            try:
                m |= 1 << self._pos[e]
            except KeyError:
                raise ElementNotInGround(e) from None
        return m

    def subset(self, mask: int) -> frozenset:
        return frozenset(e for i, e in enumerate(self.elements) if mask >> i & 1)

    def ordered(self, mask: int) -> list:
        return [e for i, e in enumerate(self.elements) if mask >> i & 1]


@dataclass(frozen=True)
class RankOracle:
    """A set function ``query: frozenset -> int`` over ``ground``."""

    ground: GroundSet
    query: Callable[[frozenset], int]

    def __call__(self, subset: Iterable[Hashable]) -> int:
        subset = frozenset(subset)
        self.ground.mask(subset)
        return self.query(subset)

    def rank_of_mask(self, mask: int) -> int:
        return self.query(self.ground.subset(mask))


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    subsets: tuple
    lhs: int
    rhs: int

    def as_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "subsets": [sorted_labels(s) for s in self.subsets],
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


def sorted_labels(s) -> list:
    return sorted((str(x) for x in s), key=_natural_key)


def _natural_key(label: str):
    head = label.rstrip("0123456789")
    tail = label[len(head):]
    return (head, int(tail) if tail else -1)


@dataclass
class AxiomReport:
    kind: str
    subsets_checked: int
    mode: str = "exhaustive"
    seed: int | None = None
    count: int | None = None
    violations: list[AxiomViolation] = field(default_factory=list)
    violation_count: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def _record(self, v: AxiomViolation) -> None:
        self.violation_count += 1
        if len(self.violations) < MAX_STORED_VIOLATIONS:
            self.violations.append(v)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "mode": self.mode,
            "seed": self.seed,
            "count": self.count,
            "subsets_checked": self.subsets_checked,
            "violation_count": self.violation_count,
            "violations": [v.as_dict() for v in self.violations],
        }


def _popcounts(n_bits: int) -> np.ndarray:
    idx = np.arange(1 << n_bits, dtype=np.int64)
    out = np.zeros_like(idx)
    for b in range(n_bits):
        out += (idx >> b) & 1
    return out


def _sample_mode(sampled: int | None, seed: int | None) -> bool:
    if sampled is None:
        return False
    if seed is None or sampled <= 0:
        raise ValueError("sampled mode needs a seed and a positive sample count")
    return True


# --- matroids ------------------------------------------------------------


def verify_matroid_axioms(
    oracle: RankOracle, sampled: int | None = None, seed: int | None = None
) -> AxiomReport:
    """Check cardinality bound, monotonicity and submodularity of ``oracle``.

    Exhaustive mode (the default) evaluates every subset once, checks axioms
    1 and 2 on every subset (monotonicity along every single-element
    extension, which implies it for all nested pairs) and axiom 3 on every
    ordered pair.  Passing ``sampled=count, seed=seed`` instead checks
    ``count`` random pairs.
    """
    n = len(oracle.ground)
    if _sample_mode(sampled, seed):
        return _matroid_sampled(oracle, sampled, seed)
    if n > MATROID_EXHAUSTIVE_CAP:
        raise GroundTooLarge(f"|E| = {n} exceeds exhaustive cap {MATROID_EXHAUSTIVE_CAP}")

    size = 1 << n
    r = np.array([oracle.rank_of_mask(a) for a in range(size)], dtype=np.int64)
    # spot re-query for determinism
    for a in sorted({0, size - 1, size // 3, (2 * size) // 3}):
        if oracle.rank_of_mask(a) != r[a]:
            raise NondeterministicOracle(f"oracle changed its value on {oracle.ground.subset(a)}")
    card = _popcounts(n)
    rep = AxiomReport("matroid", subsets_checked=0)
    g = oracle.ground

    for a in range(size):
        if not 0 <= r[a] <= card[a]:
            rep._record(AxiomViolation("bounded_by_cardinality", (g.subset(a),), int(r[a]), int(card[a])))
    rep.subsets_checked += size

    for a in range(size):
        for i in range(n):
            b = a | (1 << i)
            if b != a and r[a] > r[b]:
                rep._record(AxiomViolation("monotone", (g.subset(a), g.subset(b)), int(r[a]), int(r[b])))
    rep.subsets_checked += size * n

    idx = np.arange(size, dtype=np.int64)
    for a in range(size):
        lhs = r[a | idx] + r[a & idx]
        rhs = r[a] + r
        for b in np.nonzero(lhs > rhs)[0]:
            b = int(b)
            rep._record(AxiomViolation("submodular", (g.subset(a), g.subset(b)), int(lhs[b]), int(rhs[b])))
    rep.subsets_checked += size * size
    return rep


def _matroid_sampled(oracle: RankOracle, count: int, seed: int) -> AxiomReport:
    n = len(oracle.ground)
    g = oracle.ground
    rng = random.Random(seed)
    rep = AxiomReport("matroid", subsets_checked=0, mode="sampled", seed=seed, count=count)
    cache: dict[int, int] = {}

    def r(m: int) -> int:
        if m not in cache:
            cache[m] = oracle.rank_of_mask(m)
        return cache[m]

    for _ in range(count):
        a, b = rng.getrandbits(n) if n else 0, rng.getrandbits(n) if n else 0
        for x in (a, b):
            size = bin(x).count("1")
            if not 0 <= r(x) <= size:
                rep._record(AxiomViolation("bounded_by_cardinality", (g.subset(x),), r(x), size))
        lo = a & b
        if r(lo) > r(a):
            rep._record(AxiomViolation("monotone", (g.subset(lo), g.subset(a)), r(lo), r(a)))
        lhs, rhs = r(a | b) + r(a & b), r(a) + r(b)
        if lhs > rhs:
            rep._record(AxiomViolation("submodular", (g.subset(a), g.subset(b)), lhs, rhs))
        rep.subsets_checked += 1
    if cache and oracle.rank_of_mask(next(iter(cache))) != next(iter(cache.values())):
        raise NondeterministicOracle("oracle changed its value on re-query")
    return rep


def is_independent(oracle: RankOracle, subset: Iterable[Hashable]) -> bool:
    subset = frozenset(subset)
    return oracle(subset) == len(subset)


# --- matrices as matroids / bimatroids ----------------------------------


def _row_label(i: int) -> str:
    return f"row{i}"


def _col_label(j: int) -> str:
    return f"col{j}"


def _complement(cols: Iterable[int], n_cols: int) -> list[int]:
    cols = set(cols)
    for j in cols:
        if not 0 <= j < n_cols:
            raise IndexOutOfRange(f"column index {j} out of range for dimension {n_cols}")
    return [j for j in range(n_cols) if j not in cols]


def linking_rank(G: ExactMatrix, rows: Iterable[int], cols: Iterable[int]) -> int:
    """rank(G(rows, cols)), the bimatroid value of the pair."""
    return rank(submatrix(G, rows, cols))


def kung_rank(G: ExactMatrix, rows: Iterable[int], cols: Iterable[int]) -> int:
    """Rank of ``rows ∪ cols`` in the matroid on S ∪ T induced by ``G``.

    Equals rank(G(rows, T minus cols)) + |cols|.
    """
    cols = set(cols)
    return rank(submatrix(G, rows, _complement(cols, G.n_cols))) + len(cols)


def kung_oracle(G: ExactMatrix) -> RankOracle:
    """Rank oracle over ground ``row0..row{m-1}, col0..col{n-1}``."""
    ground = GroundSet(
        tuple(_row_label(i) for i in range(G.n_rows)) + tuple(_col_label(j) for j in range(G.n_cols))
    )
    rows_of = {_row_label(i): i for i in range(G.n_rows)}
    cols_of = {_col_label(j): j for j in range(G.n_cols)}

    def query(subset: frozenset) -> int:
        rows = [rows_of[e] for e in subset if e in rows_of]
        cols = [cols_of[e] for e in subset if e in cols_of]
        return kung_rank(G, rows, cols)

    return RankOracle(ground, query)


def _bits(mask: int) -> list[int]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _linking_table(G: ExactMatrix) -> np.ndarray:
    """table[U, V] = rank(G(U, V)) for all row masks U and column masks V."""
    nr, nc = G.n_rows, G.n_cols
    table = np.zeros((1 << nr, 1 << nc), dtype=np.int64)
    for u in range(1, 1 << nr):
        rows = _bits(u)
        for v in range(1, 1 << nc):
            table[u, v] = rank(submatrix(G, rows, _bits(v)))
    return table


def _check_bimatroid_cap(G: ExactMatrix) -> None:
    cap = BIMATROID_EXHAUSTIVE_CAP
    if G.n_rows > cap or G.n_cols > cap:
        raise GroundTooLarge(f"{G.n_rows}x{G.n_cols} exceeds exhaustive cap {cap}x{cap}")


def _rows_cols(mask_u: int, mask_v: int) -> tuple:
    return (
        frozenset(_row_label(i) for i in _bits(mask_u)),
        frozenset(_col_label(j) for j in _bits(mask_v)),
    )


def verify_bimatroid_axioms(
    G: ExactMatrix, sampled: int | None = None, seed: int | None = None
) -> AxiomReport:
    """Check that λ(U, V) = rank(G(U, V)) satisfies the three bimatroid axioms.

    Axiom 3 is λ(U1∩U2, V1∪V2) + λ(U1∪U2, V1∩V2) <= λ(U1, V1) + λ(U2, V2);
    exhaustive mode runs it over every quadruple (U1, U2, V1, V2).
    Violation subsets are stored as (U, V) pairs of row and column labels.
    """
    if _sample_mode(sampled, seed):
        return _bimatroid_sampled(G, sampled, seed)
    _check_bimatroid_cap(G)
    nr, nc = G.n_rows, G.n_cols
    lam = _linking_table(G)
    pr, pc = _popcounts(nr), _popcounts(nc)
    rep = AxiomReport("bimatroid", subsets_checked=0)

    bound = np.minimum.outer(pr, pc)
    for u, v in zip(*np.nonzero((lam > bound) | (lam < 0))):
        rep._record(AxiomViolation("bounded_by_cardinality", _rows_cols(int(u), int(v)),
                                   int(lam[u, v]), int(bound[u, v])))
    rep.subsets_checked += lam.size

    for u in range(1 << nr):
        for v in range(1 << nc):
            for i in range(nr):
                u2 = u | 1 << i
                if u2 != u and lam[u, v] > lam[u2, v]:
                    rep._record(AxiomViolation("monotone", _rows_cols(u, v) + _rows_cols(u2, v),
                                               int(lam[u, v]), int(lam[u2, v])))
            for j in range(nc):
                v2 = v | 1 << j
                if v2 != v and lam[u, v] > lam[u, v2]:
                    rep._record(AxiomViolation("monotone", _rows_cols(u, v) + _rows_cols(u, v2),
                                               int(lam[u, v]), int(lam[u, v2])))
    rep.subsets_checked += lam.size * (nr + nc)

    vs = np.arange(1 << nc, dtype=np.int64)
    v_or = vs[:, None] | vs[None, :]
    v_and = vs[:, None] & vs[None, :]
    for u1 in range(1 << nr):
        for u2 in range(1 << nr):
            lhs = lam[u1 & u2][v_or] + lam[u1 | u2][v_and]
            rhs = lam[u1][:, None] + lam[u2][None, :]
            for v1, v2 in zip(*np.nonzero(lhs > rhs)):
                rep._record(AxiomViolation(
                    "exchange", _rows_cols(u1, int(v1)) + _rows_cols(u2, int(v2)),
                    int(lhs[v1, v2]), int(rhs[v1, v2])))
            rep.subsets_checked += lhs.size
    return rep


def _bimatroid_sampled(G: ExactMatrix, count: int, seed: int) -> AxiomReport:
    nr, nc = G.n_rows, G.n_cols
    rng = random.Random(seed)
    rep = AxiomReport("bimatroid", subsets_checked=0, mode="sampled", seed=seed, count=count)
    cache: dict[tuple[int, int], int] = {}

    def lam(u: int, v: int) -> int:
        if (u, v) not in cache:
            cache[u, v] = rank(submatrix(G, _bits(u), _bits(v)))
        return cache[u, v]

    for _ in range(count):
        u1, u2 = rng.getrandbits(nr) if nr else 0, rng.getrandbits(nr) if nr else 0
        v1, v2 = rng.getrandbits(nc) if nc else 0, rng.getrandbits(nc) if nc else 0
        b = min(bin(u1).count("1"), bin(v1).count("1"))
        if not 0 <= lam(u1, v1) <= b:
            rep._record(AxiomViolation("bounded_by_cardinality", _rows_cols(u1, v1), lam(u1, v1), b))
        if lam(u1 & u2, v1 & v2) > lam(u1, v1):
            rep._record(AxiomViolation("monotone", _rows_cols(u1 & u2, v1 & v2) + _rows_cols(u1, v1),
                                       lam(u1 & u2, v1 & v2), lam(u1, v1)))
        lhs = lam(u1 & u2, v1 | v2) + lam(u1 | u2, v1 & v2)
        rhs = lam(u1, v1) + lam(u2, v2)
        if lhs > rhs:
            rep._record(AxiomViolation("exchange", _rows_cols(u1, v1) + _rows_cols(u2, v2), lhs, rhs))
        rep.subsets_checked += 1
    return rep


def verify_rank_exchange(
    G: ExactMatrix, sampled: int | None = None, seed: int | None = None
) -> AxiomReport:
    """Check the complemented-column rank inequality behind Kung submodularity.

    For all row sets s1, s2 and column sets t1, t2, with ρ(s, t) = rank(G(s, T∖t)):

        ρ(s1∩s2, t1∩t2) + ρ(s1∪s2, t1∪t2) <= ρ(s1, t1) + ρ(s2, t2)

    Adding |t1| + |t2| = |t1∩t2| + |t1∪t2| to both sides gives axiom 3 for
    :func:`kung_rank`.  Violation subsets are (s1, t1, s2, t2) label sets.
    """
    nr, nc = G.n_rows, G.n_cols
    full = (1 << nc) - 1

    if _sample_mode(sampled, seed):
        rng = random.Random(seed)
        rep = AxiomReport("rank_exchange", subsets_checked=0, mode="sampled", seed=seed, count=sampled)
        cache: dict[tuple[int, int], int] = {}

        def rho(s: int, t: int) -> int:
            if (s, t) not in cache:
                cache[s, t] = rank(submatrix(G, _bits(s), _bits(full & ~t)))
            return cache[s, t]

        for _ in range(sampled):
            s1, s2 = rng.getrandbits(nr) if nr else 0, rng.getrandbits(nr) if nr else 0
            t1, t2 = rng.getrandbits(nc) if nc else 0, rng.getrandbits(nc) if nc else 0
            lhs = rho(s1 & s2, t1 & t2) + rho(s1 | s2, t1 | t2)
            rhs = rho(s1, t1) + rho(s2, t2)
            if lhs > rhs:
                rep._record(AxiomViolation("rank_exchange", _rows_cols(s1, t1) + _rows_cols(s2, t2), lhs, rhs))
            rep.subsets_checked += 1
        return rep

    _check_bimatroid_cap(G)
    # rho[s, t] computed directly from G(s, T∖t), independently of the linking table
    rho = np.zeros((1 << nr, 1 << nc), dtype=np.int64)
    for s in range(1 << nr):
        rows = _bits(s)
        for t in range(1 << nc):
            rho[s, t] = rank(submatrix(G, rows, _bits(full & ~t)))
    rep = AxiomReport("rank_exchange", subsets_checked=0)
    ts = np.arange(1 << nc, dtype=np.int64)
    t_and = ts[:, None] & ts[None, :]
    t_or = ts[:, None] | ts[None, :]
    for s1 in range(1 << nr):
        for s2 in range(1 << nr):
            lhs = rho[s1 & s2][t_and] + rho[s1 | s2][t_or]
            rhs = rho[s1][:, None] + rho[s2][None, :]
            for t1, t2 in zip(*np.nonzero(lhs > rhs)):
                rep._record(AxiomViolation(
                    "rank_exchange", _rows_cols(s1, int(t1)) + _rows_cols(s2, int(t2)),
                    int(lhs[t1, t2]), int(rhs[t1, t2])))
            rep.subsets_checked += lhs.size
    return rep


# --- Rado-Hall ----------------------------------------------------------


@dataclass(frozen=True)
class RadoHallResult:
    feasible: bool
    violating_I: tuple[int, ...] | None = None
    lhs: int | None = None
    rhs: int | None = None


def rado_hall_feasible(
    oracle: RankOracle, families: Sequence[Iterable[Hashable]], quotas: Sequence[int]
) -> RadoHallResult:
    """Decide whether disjoint a_i ⊆ A_i with |a_i| = quotas[i] can have an
    independent union, by checking r(∪_{i∈I} A_i) >= Σ_{i∈I} ℓ_i for every I.

    Families must be pairwise disjoint.  Index sets I are visited in
    ascending bitmask order and the first failing one is returned.
    """
    if len(families) != len(quotas):
        raise ValueError("need one quota per family")
    if len(families) > RADO_HALL_MAX_FAMILIES:
        raise TooManyFamilies(f"{len(families)} families exceed the cap of {RADO_HALL_MAX_FAMILIES}")
    if any(q < 0 for q in quotas):
        raise ValueError("quotas must be nonnegative")
    masks = [oracle.ground.mask(f) for f in families]
    seen = 0
    for i, m in enumerate(masks):
        if seen & m:
            raise FamiliesNotDisjoint(f"family {i} overlaps an earlier family")
        seen |= m

    n = len(masks)
    union = [0] * (1 << n)
    need = [0] * (1 << n)
    for I in range(1, 1 << n):
        low = (I & -I).bit_length() - 1
        union[I] = union[I & (I - 1)] | masks[low]
        need[I] = need[I & (I - 1)] + quotas[low]
        if need[I] <= 0:
            continue
        have = oracle.rank_of_mask(union[I])
        if have < need[I]:
            return RadoHallResult(False, tuple(_bits(I)), have, need[I])
    return RadoHallResult(True)
