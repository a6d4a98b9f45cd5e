import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repbasis.counting import count_all, enumerate_reps
from repbasis.model import ComputationError
from repbasis.packing import overlap_pairs, pack, pack_exact, pack_greedy
from repbasis.sampling import sample_basis, trial_seed


def _disjoint(family):
    seen = set()
    for r in family:
        if seen & set(r):
            return False
        seen |= set(r)
    return True


def test_exact_examples():
    assert pack_exact([(0, 2, 4), (1, 2, 3)]).y_star == 1
    assert pack_exact([(0, 4), (1, 3)]).y_star == 2
    assert pack_exact([]).y_star == 0


def test_greedy_examples():
    assert pack_greedy([(0, 2, 4), (1, 2, 3)]).y_star == 1
    res = pack_greedy([(0, 4), (1, 3), (0, 3)])
    assert res.y_star == 2 and res.chosen == [(0, 4), (1, 3)]
    assert pack_greedy([]).y_star == 0


def test_overlap_examples():
    w, by = overlap_pairs([(0, 1, 6), (0, 2, 5), (0, 3, 4), (1, 2, 4)])
    assert w == 6 and by == {1: 6, 2: 0}
    assert overlap_pairs([(0, 4), (1, 3)])[0] == 0
    assert overlap_pairs([(0, 2, 5), (1, 2, 4), (2, 3, 7)])[0] == 3


def test_overlap_split_by_size():
    w, by = overlap_pairs([(0, 1, 5), (0, 1, 6), (0, 2, 7)])
    assert by == {1: 2, 2: 1} and w == 3


def test_cap_and_budget():
    reps = [(i, 1000 + i) for i in range(70)]
    with pytest.raises(ComputationError) as exc:
        pack_exact(reps)
    assert exc.value.code == "CAP_EXCEEDED"
    assert pack(reps).method == "greedy"
    with pytest.raises(ComputationError) as exc:
        overlap_pairs(reps, budget=10)
    assert exc.value.code == "BUDGET_EXCEEDED"


@st.composite
def families(draw):
    k = draw(st.integers(2, 4))
    ground = draw(st.integers(k, 14))
    reps = draw(
        st.lists(st.sets(st.integers(0, ground), min_size=k, max_size=k), max_size=14, unique_by=frozenset)
    )
    return [tuple(sorted(r)) for r in reps]


def _brute_max(reps):
    best = 0
    m = len(reps)
    for mask in range(1 << m):
        fam = [reps[i] for i in range(m) if mask >> i & 1]
        if len(fam) > best and _disjoint(fam):
            best = len(fam)
    return best


@given(families())
@settings(max_examples=150, deadline=None)
def test_exact_is_maximum_and_witnessed(reps):
    res = pack_exact(reps)
    assert res.y_star == _brute_max(reps) == len(res.chosen)
    assert _disjoint(res.chosen)
    used = {x for r in res.chosen for x in r}
    # witness is maximal: every other representation meets it
    assert all(used & set(r) for r in reps if r not in res.chosen)
    assert pack_greedy(reps).y_star <= res.y_star <= len(reps)


@given(families(), st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_exact_independent_of_order(reps, rnd):
    shuffled = list(reps)
    rnd.shuffle(shuffled)
    assert pack_exact(shuffled).y_star == pack_exact(reps).y_star


@given(families())
@settings(max_examples=150, deadline=None)
def test_sandwich(reps):
    res = pack_exact(reps)
    assert res.y_star <= len(reps) <= res.y_star + res.w
    g = pack_greedy(reps)
    assert g.y_star <= len(reps) <= g.y_star + g.w


@pytest.mark.parametrize("t", range(10))
def test_k2_reps_are_disjoint(t):
    s = sample_basis(80, 0.5, trial_seed(3, t))
    prof = count_all(s, 2)
    for j in range(0, 161, 7):
        reps = enumerate_reps(s, 2, j)
        res = pack_exact(reps)
        assert res.y_star == prof[j] and res.w == 0


def test_sandwich_on_samples():
    for t in range(30):
        s = sample_basis(60, 0.35, trial_seed(11, t))
        reps = enumerate_reps(s, 3, 90)
        res = pack(reps)
        assert res.y_star <= len(reps) <= res.y_star + res.w


def test_overlap_matches_set_intersection():
    rnd = random.Random(4)
    reps = sorted({tuple(sorted(rnd.sample(range(15), 3))) for _ in range(40)})
    m = len(reps)
    w = sum(1 for a in range(m) for b in range(a + 1, m) if set(reps[a]) & set(reps[b]))
    assert overlap_pairs(reps)[0] == w
