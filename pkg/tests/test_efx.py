from fractions import Fraction

import mpmath
import pytest
from conftest import all_words, brute_critical, to_mpf
from hypothesis import given, settings
from hypothesis import strategies as st

from efxchores.efx import (
    Allocation,
    allocation_count,
    check_no_efx,
    critical_alpha_chores,
    critical_witness,
    enumerate_allocations,
    instance_threshold,
    is_alpha_efx,
)
from efxchores.instances import GROUND, build_cs24, extend_with_dummies
from efxchores.numeric import INFINITY, ExactValue, ev
from efxchores.setfn import Additive, DenseTable, GroundSet, Profile


def p2(num, den):
    return ExactValue(1, Fraction(num, den))


def unit_additive(n, m, polarity="chores"):
    g = GroundSet(tuple(f"x{k}" for k in range(m)))
    return Profile(g, tuple(Additive(g, (Fraction(1),) * m) for _ in range(n)), polarity)


def test_enumeration_counts():
    assert len(list(enumerate_allocations(3, GROUND))) == 729
    assert len(list(enumerate_allocations(2, 1))) == 2
    assert list(enumerate_allocations(1, 0)) == [Allocation((), 1)]
    assert allocation_count(3, 6) == 729


def test_enumeration_is_lexicographic():
    words = [X.assignment for X in enumerate_allocations(2, 3)]
    assert words == sorted(words)
    assert [X.index for X in enumerate_allocations(2, 3)] == list(range(8))


def test_allocation_from_bundles():
    X = Allocation.from_bundles(GROUND, [["b2", "b3"], ["h", "l1", "l2"], ["b1"]])
    assert X.word() == "111200"
    assert X.named(GROUND) == [["b2", "b3"], ["h", "l1", "l2"], ["b1"]]
    with pytest.raises(ValueError):
        Allocation.from_bundles(GROUND, [["h", "h"], [], []])
    with pytest.raises(ValueError):
        Allocation.from_bundles(GROUND, [["h"], [], []])


def test_critical_examples(compressed, coverage):
    p = unit_additive(2, 2)
    assert critical_alpha_chores(p, Allocation((0, 1), 2)) == 1
    assert critical_witness(p, Allocation((0, 1), 2)) is None
    everything = Allocation((0,) * 6, 3)
    assert critical_alpha_chores(compressed.profile, everything) is INFINITY
    X = Allocation.from_bundles(GROUND, [["b2", "b3"], ["h", "l1", "l2"], ["b1"]])
    crit = critical_alpha_chores(coverage.profile, X)
    assert crit >= Fraction(20, 19)
    with mpmath.workprec(300):
        assert abs(to_mpf(crit) - brute_critical(coverage.profile, X.assignment)) < mpmath.mpf(2) ** -250


def test_critical_witness_attains_ratio(coverage):
    X = Allocation.from_bundles(GROUND, [["b2", "b3"], ["h", "l1", "l2"], ["b1"]])
    w = critical_witness(coverage.profile, X)
    assert w.ratio == critical_alpha_chores(coverage.profile, X)
    f = coverage.profile.agents[w.envier]
    masks = X.bundles
    assert w.residual == f(masks[w.envier] ^ (1 << w.item))
    assert w.reference == f(masks[w.rival])


def test_is_alpha_efx_chores(coverage):
    X = Allocation.from_bundles(GROUND, [["b2", "b3"], ["h", "l1", "l2"], ["b1"]])
    crit = critical_alpha_chores(coverage.profile, X)
    assert is_alpha_efx(coverage.profile, X, crit) is None
    w = is_alpha_efx(coverage.profile, X, 1)
    assert w is not None and w.residual > w.reference
    with pytest.raises(ValueError):
        is_alpha_efx(coverage.profile, X, Fraction(1, 2))


def test_is_alpha_efx_goods():
    p = unit_additive(2, 3, "goods")
    X = Allocation((0, 0, 0), 2)
    w = is_alpha_efx(p, X, 1)
    assert w is not None and (w.envier, w.rival) == (1, 0)
    assert w.residual == 2 and w.reference == 0
    assert is_alpha_efx(p, Allocation((0, 0, 1), 2), 1) is None
    with pytest.raises(ValueError):
        is_alpha_efx(p, X, 2)
    with pytest.raises(ValueError):
        is_alpha_efx(p, X, 0)


def test_single_agent():
    p = unit_additive(1, 3)
    assert is_alpha_efx(p, Allocation((0, 0, 0), 1), 1) is None
    assert instance_threshold(p).alpha_star == 1


def test_threshold_small():
    r = instance_threshold(unit_additive(2, 1))
    assert r.alpha_star == 1 and r.argmin == Allocation((0,), 2) and r.allocations == 2
    assert not check_no_efx(unit_additive(2, 2)).holds
    assert check_no_efx(unit_additive(2, 2)).efx_allocation == Allocation((0, 1), 2)


def test_threshold_table(coverage):
    r = instance_threshold(coverage.profile, table=True)
    assert len(r.table) == 729
    assert min(c for _, c in r.table) == r.alpha_star
    first = next(X for X, c in r.table if c == r.alpha_star)
    assert first == r.argmin


FROZEN = {
    "compressed": p2(1, 3),
    "coverage": ExactValue(Fraction(18, 17)),
    "warmup": p2(1, 6),
    "ordinal": ExactValue(Fraction(3, 2)),
    "cs24": ExactValue(3),
}


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_thresholds(name, request):
    inst = request.getfixturevalue(name)
    r = instance_threshold(inst.profile)
    assert r.alpha_star == FROZEN[name]
    assert r.witness is not None and r.witness.ratio == r.alpha_star
    if inst.claimed_bound is not None:
        assert r.certifies(inst.claimed_bound)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["compressed", "coverage"])
def test_threshold_against_brute_oracle(name, request):
    inst = request.getfixturevalue(name)
    r = instance_threshold(inst.profile, table=True)
    with mpmath.workprec(300):
        oracle = [brute_critical(inst.profile, w) for w in all_words(3, 6)]
        for (X, crit), ref in zip(r.table, oracle):
            assert abs(to_mpf(crit) - ref) < mpmath.mpf(2) ** -250 if crit is not INFINITY else ref == mpmath.inf
        assert abs(to_mpf(r.alpha_star) - min(oracle)) < mpmath.mpf(2) ** -250


@pytest.mark.parametrize("k", [3, 4, 5, 10])
def test_cs24_threshold_is_k(k):
    assert instance_threshold(build_cs24(k).profile).alpha_star == k


def test_no_efx_certificates(compressed, coverage, ordinal):
    for inst in (compressed, coverage, ordinal):
        result = check_no_efx(inst.profile)
        assert result.holds and len(result.certificate) == 729
        for X, w in result.certificate.items():
            assert is_alpha_efx(inst.profile, X, 1) == w


def test_parallel_matches_serial(coverage):
    serial = instance_threshold(coverage.profile, workers=1, table=True)
    parallel = instance_threshold(coverage.profile, workers=2, table=True)
    assert serial.alpha_star == parallel.alpha_star
    assert serial.argmin == parallel.argmin
    assert serial.table == parallel.table
    assert check_no_efx(coverage.profile, workers=2).certificate == check_no_efx(coverage.profile).certificate


def test_dummy_invariance(compressed):
    base = instance_threshold(compressed.profile).alpha_star
    ext = extend_with_dummies(compressed, ["d1"])
    assert instance_threshold(ext.profile).alpha_star == base


positive = st.fractions(Fraction(1, 8), 8, max_denominator=8)


def _random_profile(data, n, m):
    g = GroundSet(tuple(f"x{k}" for k in range(m)))
    agents = []
    for _ in range(n):
        weights = data.draw(st.lists(positive, min_size=m, max_size=m))
        agents.append(Additive(g, tuple(weights)))
    return Profile(g, tuple(agents), "chores")


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_monotone_in_alpha(data):
    p = _random_profile(data, 2, 3)
    X = Allocation(tuple(data.draw(st.lists(st.integers(0, 1), min_size=3, max_size=3))), 2)
    crit = critical_alpha_chores(p, X)
    for a in (1, Fraction(3, 2), 2, 5, 100):
        if is_alpha_efx(p, X, a) is None:
            for b in (b for b in (1, Fraction(3, 2), 2, 5, 100) if b > a):
                assert is_alpha_efx(p, X, b) is None
    if crit is not INFINITY:
        assert is_alpha_efx(p, X, crit) is None


@settings(max_examples=30, deadline=None)
@given(st.data(), positive)
def test_scale_invariance(data, scale):
    p = _random_profile(data, 3, 3)
    scaled = Profile(p.ground, tuple(Additive(p.ground, tuple(w * scale for w in f.weights)) for f in p.agents), "chores")
    assert instance_threshold(p).alpha_star == instance_threshold(scaled).alpha_star


@settings(max_examples=30, deadline=None)
@given(st.data(), st.permutations([0, 1, 2]))
def test_agent_permutation_equivariance(data, perm):
    p = _random_profile(data, 3, 3)
    permuted = Profile(p.ground, tuple(p.agents[perm[a]] for a in range(3)), "chores")
    word = tuple(data.draw(st.lists(st.integers(0, 2), min_size=3, max_size=3)))
    # agent a in the permuted profile is agent perm[a] in the original
    inverse = {perm[a]: a for a in range(3)}
    relabelled = tuple(inverse[x] for x in word)
    assert critical_alpha_chores(p, Allocation(word, 3)) == critical_alpha_chores(permuted, Allocation(relabelled, 3))
    assert instance_threshold(p).alpha_star == instance_threshold(permuted).alpha_star


def test_dense_zero_rival_gives_infinity():
    g = GroundSet(("a", "b"))
    f = DenseTable(g, (ev(0), ev(1), ev(1), ev(2)))
    p = Profile(g, (f, f), "chores")
    assert critical_alpha_chores(p, Allocation((0, 0), 2)) is INFINITY
    assert instance_threshold(p).alpha_star == 1
