from fractions import Fraction

import pytest

from efxchores.instances import (
    GROUND,
    ITEMS,
    build,
    build_cs24,
    coverage_atoms,
    extend_with_dummies,
)
from efxchores.numeric import ExactValue, ev
from efxchores.setfn import check_monotone, check_normalized, check_subadditive, distinct_values


def p2(num, den):
    return ExactValue(1, Fraction(num, den))


def test_item_order(ordinal, compressed, coverage, warmup, cs24):
    for inst in (ordinal, compressed, coverage, warmup, cs24):
        assert inst.profile.ground.items == ("h", "l1", "l2", "b1", "b2", "b3")
        assert inst.profile.n == 3 and inst.profile.polarity == "chores"


def test_cs24_examples(cs24):
    d1, d2 = cs24.profile.agents[0], cs24.profile.agents[1]
    assert d1(["b2", "b3"]) == 9
    assert d1(["h", "l1"]) == 4
    assert d2(["b2"]) == 0
    assert d1(["h"]) == 3 and d1(["l2"]) == 1


def test_cs24_rational_k():
    d = build_cs24(Fraction(5, 2)).profile.agents[0]
    assert d(["h", "b1"]) == Fraction(25, 4)
    assert d(["h", "l1", "l2"]) == Fraction(9, 2)


@pytest.mark.parametrize("k", [2, 1, Fraction(3, 2)])
def test_cs24_rejects_small_k(k):
    with pytest.raises(ValueError):
        build_cs24(k)


def test_warmup_examples(warmup):
    c1 = warmup.profile.agents[0]
    assert c1(["b2", "b3"]) == 1
    assert c1(["l1"]) == p2(-5, 6)
    assert c1([]) == 0
    assert warmup.claimed_bound == p2(1, 6)


def test_warmup_value_set(warmup):
    expected = [p2(-1, 1), p2(-5, 6), p2(-4, 6), p2(-3, 6), p2(-2, 6), p2(-1, 6), ev(1)]
    for f in warmup.profile.agents:
        assert distinct_values(f) == expected


def test_warmup_displayed_map(warmup, cs24):
    level_image = {0: p2(-1, 1), 1: p2(-5, 6), 2: p2(-4, 6), 3: p2(-3, 6), 4: p2(-2, 6), 5: p2(-1, 6), 9: ev(1)}
    for d, c in zip(cs24.profile.agents, warmup.profile.agents):
        for S in range(1, 64):
            assert c(S) == level_image[int(d(S).to_fraction())]


def test_four_level_examples(ordinal):
    d1 = ordinal.profile.agents[0]
    assert d1(["b1", "l2"]) == 3
    assert d1(["h", "b2"]) == 2
    assert d1(["b1"]) == 0
    assert d1(["l1", "b3"]) == 1
    assert d1(["h", "l1", "b2", "b3"]) == 3


def test_four_level_compressed_examples(compressed):
    c1 = compressed.profile.agents[0]
    assert c1(["b1", "l2"]) == 1
    assert c1(["l1"]) == p2(-2, 3)
    assert c1([]) == 0
    assert compressed.claimed_bound == p2(1, 3)


def test_compressed_value_set(compressed, ordinal):
    image = {0: p2(-1, 1), 1: p2(-2, 3), 2: p2(-1, 3), 3: ev(1)}
    for d, c in zip(ordinal.profile.agents, compressed.profile.agents):
        assert distinct_values(c) == sorted(image.values())
        for S in range(1, 64):
            assert c(S) == image[int(d(S).to_fraction())]


def test_coverage_examples(coverage):
    c1 = coverage.profile.agents[0]
    assert c1(["b1", "h"]) == 20
    assert c1(["b2"]) == 10
    assert c1(["b1"]) == 6
    assert coverage.claimed_bound == Fraction(20, 19)
    assert sorted(w for _, w in coverage_atoms(0)) == [1, 1, 2, 2, 7, 7]


def test_coverage_atom_firing_oracle(coverage):
    # direct transcription of the three weighted sums, per agent
    A = {"h", "l1", "l2"}
    for i, f in enumerate(coverage.profile.agents):
        bi = f"b{i + 1}"
        rest = [b for b in ("b1", "b2", "b3") if b != bi]
        for S in range(64):
            items = set(GROUND.names(S))
            value = 7 * sum(bool(items & (A | {b})) for b in rest)
            value += sum(bool(items & {bi, b}) for b in rest)
            value += 2 * sum(bool(items & {"h", bi, b}) for b in rest)
            assert f(S) == value


def test_coverage_level_multisets(coverage, ordinal):
    table = {0: {0, 6, 10, 13}, 1: {14, 17}, 2: {18, 19}, 3: {20}}
    for d, c in zip(ordinal.profile.agents, coverage.profile.agents):
        image = {lvl: set() for lvl in table}
        for S in range(64):
            image[int(d(S).to_fraction())].add(c(S).to_fraction())
        assert image == table


def test_ordinal_monotone(ordinal):
    for f in ordinal.profile.agents:
        assert check_monotone(f).holds


def _swap(S, i):
    """Exchange b1 and b_{i+1} in mask S."""
    b1, bi = 1 << 3, 1 << (3 + i)
    out = S & ~(b1 | bi)
    if S & b1:
        out |= bi
    if S & bi:
        out |= b1
    return out


@pytest.mark.parametrize("name", ["ordinal", "compressed", "coverage", "cs24", "warmup"])
def test_agent_symmetry(name, request):
    agents = request.getfixturevalue(name).profile.agents
    for i in (1, 2):
        for S in range(64):
            assert agents[i](_swap(S, i)) == agents[0](S)


def test_dummies(coverage):
    ext = extend_with_dummies(coverage, ["d1"])
    c1 = ext.profile.agents[0]
    assert ext.profile.ground.items == ITEMS + ("d1",)
    assert c1(["d1"]) == 0
    assert c1(["h", "d1"]) == 18
    assert extend_with_dummies(coverage, []) is coverage
    with pytest.raises(ValueError):
        extend_with_dummies(coverage, ["h"])
    with pytest.raises(ValueError):
        extend_with_dummies(coverage, ["d1", "d1"])


@pytest.mark.parametrize("name", ["ordinal", "compressed", "coverage", "cs24", "warmup"])
def test_dummies_preserve_classes_and_restriction(name, request):
    inst = request.getfixturevalue(name)
    ext = extend_with_dummies(inst, ["d1", "d2"])
    core = inst.profile.ground.full
    for f, g in zip(inst.profile.agents, ext.profile.agents):
        assert all(g(S) == f(S & core) for S in range(1 << ext.profile.m))
        for check in (check_normalized, check_monotone, check_subadditive):
            assert check(f).holds == check(g).holds


def test_build_registry():
    assert build("cs24", k=4).profile.agents[0](["b2", "b3"]) == 16
    assert build("fourlevel", dummies=["z"]).profile.m == 7
    with pytest.raises(KeyError):
        build("nope")
    with pytest.raises(ValueError):
        build("fourlevel", k=3)
