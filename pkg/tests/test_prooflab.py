from fractions import Fraction

import pytest

from efxchores.efx import Allocation, check_no_efx, enumerate_allocations
from efxchores.instances import GROUND, extend_with_dummies
from efxchores.numeric import ExactValue
from efxchores.prooflab import (
    CASES,
    GroundSetMismatch,
    case_of,
    check_case,
    check_case_derangement,
    check_case_matching_special,
    check_case_two_specials,
    check_level_table,
    proof_witness,
)


def p2(num, den):
    return ExactValue(1, Fraction(num, den))


def test_cases_partition():
    counts = {c: 0 for c in CASES}
    for X in enumerate_allocations(3, GROUND):
        counts[case_of(X)] += 1
    assert counts == {"two-specials": 567, "matching-special": 108, "derangement": 54}


def test_case_examples():
    assert case_of(Allocation.from_bundles(GROUND, [["b1", "b2"], ["h", "b3"], ["l1", "l2"]])) == "two-specials"
    assert case_of(Allocation.from_bundles(GROUND, [["b1", "h"], ["b3", "l1"], ["b2", "l2"]])) == "matching-special"
    assert case_of(Allocation.from_bundles(GROUND, [["b2", "h"], ["b3", "l1"], ["b1", "l2"]])) == "derangement"


MIN_RATIOS = {
    "ordinal": (Fraction(3, 2), Fraction(3, 2), Fraction(2)),
    "compressed": (p2(1, 3),) * 3,
    "coverage": (Fraction(20, 19), Fraction(20, 19), Fraction(18, 17)),
    "cs24": (Fraction(9, 5), Fraction(3, 2), Fraction(3, 2)),
    "warmup": (p2(1, 6),) * 3,
}


@pytest.mark.parametrize("name", sorted(MIN_RATIOS))
def test_every_family_passes(name, request):
    profile = request.getfixturevalue(name).profile
    reports = [check_case_two_specials(profile), check_case_matching_special(profile), check_case_derangement(profile)]
    assert [r.case for r in reports] == list(CASES)
    assert [r.count for r in reports] == [567, 108, 54]
    for r, expected in zip(reports, MIN_RATIOS[name]):
        assert r.passed and not r.failures
        assert r.min_ratio == expected


def test_witness_union_matches_certificate(coverage):
    keys = set()
    for case in CASES:
        report = check_case(coverage.profile, case)
        assert not keys & set(report.witnesses)
        keys |= set(report.witnesses)
    assert keys == set(check_no_efx(coverage.profile).certificate)


def test_prescribed_triples_are_real(compressed):
    tables = compressed.profile.tables()
    for X in enumerate_allocations(3, GROUND):
        w = proof_witness(compressed.profile, X)
        masks = X.bundles
        assert masks[w.envier] >> w.item & 1
        assert w.rival != w.envier
        assert w.residual == tables[w.envier][masks[w.envier] ^ (1 << w.item)]
        assert w.reference == tables[w.envier][masks[w.rival]]
        assert w.ratio > 1


def test_additive_profile_fails_some_case():
    from efxchores.setfn import Additive, Profile

    agents = tuple(Additive(GROUND, (Fraction(1),) * 6) for _ in range(3))
    report = check_case(Profile(GROUND, agents, "chores"), "two-specials")
    assert not report.passed and report.failures


def test_unknown_case(coverage):
    with pytest.raises(ValueError):
        check_case(coverage.profile, "nope")


def test_ground_mismatch(coverage):
    ext = extend_with_dummies(coverage, ["d1"])
    with pytest.raises(GroundSetMismatch):
        check_case_two_specials(ext.profile)
    with pytest.raises(GroundSetMismatch):
        check_level_table(ext)


def test_level_table(coverage):
    report = check_level_table(coverage)
    assert report.passed and not report.mismatches
    for gaps in report.gaps:
        assert gaps == [Fraction(14, 13), Fraction(18, 17), Fraction(20, 19)]
    assert report.min_gap == Fraction(20, 19)
    assert [v.to_fraction() for v in report.images[0][0]] == [0, 6, 10, 13]


def test_level_table_rejects_other_profiles(compressed):
    report = check_level_table(compressed)
    assert not report.passed and report.mismatches
