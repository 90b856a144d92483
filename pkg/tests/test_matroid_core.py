import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blocktransversal.exact_linalg import ExactMatrix, IndexOutOfRange, make_field, rank, submatrix
from blocktransversal.matroid_core import (
    ElementNotInGround,
    FamiliesNotDisjoint,
    GroundSet,
    GroundTooLarge,
    RankOracle,
    TooManyFamilies,
    is_independent,
    kung_oracle,
    kung_rank,
    linking_rank,
    rado_hall_feasible,
    verify_bimatroid_axioms,
    verify_matroid_axioms,
    verify_rank_exchange,
)

GF2, GF3, GF5 = (make_field(f"gf {p}") for p in (2, 3, 5))
QQ = make_field("rational")
I2 = ExactMatrix.identity(GF2, 2)
M5 = ExactMatrix.from_rows(GF5, [[1, 2, 0], [2, 4, 1], [0, 1, 3]])


def free_oracle(n):
    return RankOracle(GroundSet(tuple(range(n))), len)


def random_matrix(rng, field, nr, nc):
    if field.is_prime_field:
        data = [rng.randrange(field.p) for _ in range(nr * nc)]
    else:
        data = [rng.randint(-3, 3) for _ in range(nr * nc)]
    return ExactMatrix(field, nr, nc, tuple(data))


# --- matroid axioms -------------------------------------------------------


def test_free_matroid_passes():
    rep = verify_matroid_axioms(free_oracle(4))
    assert rep.passed and rep.violation_count == 0
    assert rep.mode == "exhaustive"


def test_squared_cardinality_violates_axiom_one():
    oracle = RankOracle(GroundSet(("a", "b", "c")), lambda A: len(A) ** 2)
    rep = verify_matroid_axioms(oracle)
    assert not rep.passed
    bounded = [v for v in rep.violations if v.axiom == "bounded_by_cardinality"]
    assert {frozenset(v.subsets[0]) for v in bounded if v.rhs == 2} == {
        frozenset(c) for c in combinations("abc", 2)
    }
    assert all(v.lhs == 4 for v in bounded if v.rhs == 2)
    # every stored violation re-checks from its subsets
    for v in rep.violations:
        if v.axiom == "submodular":
            A, B = v.subsets
            assert oracle.query(A | B) + oracle.query(A & B) > oracle.query(A) + oracle.query(B)


def test_non_monotone_oracle_detected():
    oracle = RankOracle(GroundSet((0, 1)), lambda A: 1 if A == {0} else 0)
    rep = verify_matroid_axioms(oracle)
    assert ("monotone", (frozenset({0}), frozenset({0, 1}))) in {(v.axiom, v.subsets) for v in rep.violations}


def test_kung_identity_passes_exhaustively():
    rep = verify_matroid_axioms(kung_oracle(I2))
    assert rep.passed
    # 16 bound checks, 16*4 extensions, 256 pairs
    assert rep.subsets_checked == 16 + 64 + 256


def test_ground_cap():
    with pytest.raises(GroundTooLarge):
        verify_matroid_axioms(free_oracle(13))
    rep = verify_matroid_axioms(free_oracle(13), sampled=200, seed=3)
    assert rep.passed and rep.mode == "sampled" and rep.subsets_checked == 200


def test_sampled_mode_needs_seed():
    with pytest.raises(ValueError):
        verify_matroid_axioms(free_oracle(3), sampled=10)


def test_sampled_mode_finds_bad_oracle():
    oracle = RankOracle(GroundSet(tuple(range(14))), lambda A: len(A) ** 2)
    assert not verify_matroid_axioms(oracle, sampled=50, seed=0).passed


def test_is_independent():
    assert is_independent(free_oracle(3), [])
    assert is_independent(free_oracle(3), [0, 2])
    oracle = kung_oracle(I2)
    assert is_independent(oracle, [])
    assert not is_independent(oracle, ["row0", "col0"])
    assert is_independent(oracle, ["row0", "col1"])
    with pytest.raises(ElementNotInGround):
        is_independent(oracle, ["row7"])


# --- Kung rank and linking rank -------------------------------------------


def test_kung_rank_examples():
    assert kung_rank(M5, [], []) == 0
    assert kung_rank(M5, [0, 1, 2], [0, 1, 2]) == 3
    assert kung_rank(I2, [0], [0]) == 1
    with pytest.raises(IndexOutOfRange):
        kung_rank(I2, [0], [5])


def test_linking_rank_examples():
    assert linking_rank(M5, [], [0, 1]) == 0
    assert linking_rank(M5, [0, 1], []) == 0
    assert linking_rank(I2, [0, 1], [0, 1]) == 2
    # rows 0 and 1 are proportional on columns {0, 1}
    assert linking_rank(M5, [0, 1], [0, 1]) == 1


def test_kung_oracle_ground_labels():
    assert list(kung_oracle(M5).ground) == ["row0", "row1", "row2", "col0", "col1", "col2"]


@st.composite
def small_matrices(draw, max_side=4):
    field = draw(st.sampled_from([GF2, GF3, GF5, QQ]))
    nr, nc = draw(st.integers(0, max_side)), draw(st.integers(0, max_side))
    seed = draw(st.integers(0, 10**6))
    return random_matrix(random.Random(seed), field, nr, nc)


@settings(max_examples=60)
@given(small_matrices(), st.data())
def test_kung_rank_identities(G, data):
    S, T = range(G.n_rows), range(G.n_cols)
    s = data.draw(st.sets(st.sampled_from(S)) if G.n_rows else st.just(set()))
    t = data.draw(st.sets(st.sampled_from(T)) if G.n_cols else st.just(set()))
    assert kung_rank(G, [], t) == len(t)
    assert kung_rank(G, s, []) == linking_rank(G, s, T)
    assert kung_rank(G, s, t) == rank(submatrix(G, s, [j for j in T if j not in t])) + len(t)


@settings(max_examples=60)
@given(small_matrices(), st.data())
def test_kung_rank_monotone_in_both_arguments(G, data):
    rows = st.sets(st.sampled_from(range(G.n_rows))) if G.n_rows else st.just(set())
    cols = st.sets(st.sampled_from(range(G.n_cols))) if G.n_cols else st.just(set())
    s1, s_extra = data.draw(rows), data.draw(rows)
    t1, t_extra = data.draw(cols), data.draw(cols)
    s2, t2 = s1 | s_extra, t1 | t_extra
    assert kung_rank(G, s1, t1) <= kung_rank(G, s2, t1) <= kung_rank(G, s2, t2)
    # removing |t2| - |t1| columns costs at most that much rank
    T = range(G.n_cols)
    loss = linking_rank(G, s2, [j for j in T if j not in t1]) - linking_rank(G, s2, [j for j in T if j not in t2])
    assert 0 <= loss <= len(t2) - len(t1)


@settings(max_examples=25, deadline=None)
@given(small_matrices(max_side=6).filter(lambda G: G.n_rows + G.n_cols <= 12))
def test_kung_oracle_is_a_matroid(G):
    assert verify_matroid_axioms(kung_oracle(G)).passed


# --- bimatroid / exchange -------------------------------------------------


@pytest.mark.parametrize(
    "G",
    [
        I2,
        ExactMatrix.from_rows(QQ, [[1, 1, 1]] * 3),
        random_matrix(random.Random(7), GF3, 4, 4),
    ],
    ids=["identity2", "ones3", "gf3_seed7"],
)
def test_bimatroid_examples(G):
    rep = verify_bimatroid_axioms(G)
    assert rep.passed and rep.violation_count == 0


@pytest.mark.parametrize(
    "G", [I2, random_matrix(random.Random(11), QQ, 3, 4)], ids=["identity2", "rational3x4_seed11"]
)
def test_rank_exchange_examples(G):
    assert verify_rank_exchange(G).passed


def test_rank_exchange_equal_arguments_is_equality():
    G = random_matrix(random.Random(1), GF5, 3, 3)
    T = range(3)

    def rho(s, t):
        return linking_rank(G, s, [j for j in T if j not in t])

    for s, t in [({0}, {1}), ({0, 2}, set()), (set(), {0, 1, 2}), ({0, 1, 2}, {2})]:
        lhs = rho(s & s, t & t) + rho(s | s, t | t)
        assert lhs == rho(s, t) + rho(s, t)


def test_opposite_exchange_direction_fails():
    # rho(s1,t1) + rho(s2,t2) <= rho(s1∩s2, t1∩t2) + rho(s1∪s2, t1∪t2) does not hold
    T = [0, 1]

    def rho(s, t):
        return linking_rank(I2, s, [j for j in T if j not in t])

    s1, t1, s2, t2 = {0}, {1}, {1}, {0}
    assert rho(s1, t1) + rho(s2, t2) == 2
    assert rho(s1 & s2, t1 & t2) + rho(s1 | s2, t1 | t2) == 0


def test_bimatroid_detects_broken_table(monkeypatch):
    import blocktransversal.matroid_core as mc

    real = mc._linking_table

    def broken(G):
        t = real(G).copy()
        t[1, 1] = 5
        return t

    monkeypatch.setattr(mc, "_linking_table", broken)
    rep = verify_bimatroid_axioms(I2)
    assert not rep.passed
    assert {v.axiom for v in rep.violations} >= {"bounded_by_cardinality", "monotone"}


def test_bimatroid_caps_and_sampling():
    big = random_matrix(random.Random(0), GF3, 6, 3)
    with pytest.raises(GroundTooLarge):
        verify_bimatroid_axioms(big)
    with pytest.raises(GroundTooLarge):
        verify_rank_exchange(big)
    assert verify_bimatroid_axioms(big, sampled=300, seed=1).passed
    assert verify_rank_exchange(big, sampled=300, seed=1).passed


def test_reports_are_deterministic():
    oracle = RankOracle(GroundSet(("a", "b", "c")), lambda A: len(A) ** 2)
    assert verify_matroid_axioms(oracle).as_dict() == verify_matroid_axioms(oracle).as_dict()
    G = random_matrix(random.Random(5), QQ, 5, 5)
    assert verify_rank_exchange(G, sampled=50, seed=9).as_dict() == verify_rank_exchange(G, sampled=50, seed=9).as_dict()


# --- Rado-Hall ------------------------------------------------------------


def test_rado_hall_zero_quotas():
    oracle = RankOracle(GroundSet((0, 1, 2)), lambda A: 0)
    assert rado_hall_feasible(oracle, [[0], [1, 2]], [0, 0]).feasible


def test_rado_hall_free_matroid():
    assert rado_hall_feasible(free_oracle(5), [[0, 1], [2], [3, 4]], [2, 1, 1]).feasible


def test_rado_hall_kung_identity():
    oracle = kung_oracle(I2)
    fams = [["row0"], ["row1"], ["col0", "col1"]]
    assert rado_hall_feasible(oracle, fams, [1, 1, 0]).feasible
    # brute force: an independent set with one element from each row family exists
    assert is_independent(oracle, ["row0", "row1"])


def test_rado_hall_reports_first_violation():
    # uniform matroid U(1, 3)
    oracle = RankOracle(GroundSet((0, 1, 2)), lambda A: min(len(A), 1))
    res = rado_hall_feasible(oracle, [[0], [1], [2]], [1, 1, 0])
    assert not res.feasible
    assert res.violating_I == (0, 1) and (res.lhs, res.rhs) == (1, 2)


def test_rado_hall_input_errors():
    with pytest.raises(FamiliesNotDisjoint):
        rado_hall_feasible(free_oracle(3), [[0, 1], [1]], [1, 1])
    with pytest.raises(TooManyFamilies):
        rado_hall_feasible(free_oracle(21), [[i] for i in range(21)], [1] * 21)
    with pytest.raises(ElementNotInGround):
        rado_hall_feasible(free_oracle(2), [[5]], [1])


def _rado_hall_brute(oracle, families, quotas):
    """Search for disjoint picks of the right sizes with an independent union."""
    from itertools import product

    for picks in product(*(combinations(f, q) for f, q in zip(families, quotas))):
        union = [x for p in picks for x in p]
        if oracle(union) == len(union):
            return True
    return False


@settings(max_examples=40, deadline=None)
@given(small_matrices(max_side=3), st.data())
def test_rado_hall_matches_search_on_kung(G, data):
    oracle = kung_oracle(G)
    labels = list(oracle.ground)
    k = data.draw(st.integers(1, 3))
    owner = [data.draw(st.integers(0, k - 1)) for _ in labels]
    families = [[e for e, o in zip(labels, owner) if o == f] for f in range(k)]
    quotas = [data.draw(st.integers(0, len(f))) for f in families]
    res = rado_hall_feasible(oracle, families, quotas)
    assert res.feasible == _rado_hall_brute(oracle, families, quotas)
    if res.feasible:
        for i in range(k):
            if quotas[i]:
                lowered = quotas[:i] + [quotas[i] - 1] + quotas[i + 1:]
                assert rado_hall_feasible(oracle, families, lowered).feasible
