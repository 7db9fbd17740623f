"""Executable case analysis for the four-level obstruction.

Allocations of the six core items are split by where the special chores
``b1, b2, b3`` land:

* ``two-specials``: some agent holds at least two of them;
* ``matching-special``: each agent holds exactly one, and some agent holds
  its own;
* ``derangement``: each agent holds exactly one, none its own.

For every allocation in a family the checker constructs the violating
triple the case argument prescribes (rather than searching freely) and
evaluates its ratio on the given profile.  A family passes when every
prescribed triple is a strict violation.  Symmetric sub-cases are handled by
naming the agents explicitly instead of relabelling.

``check_level_table`` verifies the value-by-level table of the coverage
realization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .efx import Allocation, ViolationWitness, enumerate_allocations
from .instances import (
    B1,
    B2,
    B3,
    GROUND,
    H,
    ITEMS,
    ORDINARY,
    SPECIALS,
    NamedInstance,
    four_level,
    others,
    special,
)
from .numeric import ONE, ExactValue, ExtendedValue, ev_ratio
from .setfn import Profile, iter_bits, popcount

__all__ = [
    "CASES",
    "GroundSetMismatch",
    "CaseReport",
    "LevelTableReport",
    "case_of",
    "proof_witness",
    "check_case",
    "check_case_two_specials",
    "check_case_matching_special",
    "check_case_derangement",
    "check_level_table",
    "LEVEL_TABLE",
]

CASES = ("two-specials", "matching-special", "derangement")
ALL_SPECIALS = B1 | B2 | B3


class GroundSetMismatch(ValueError):
    pass


def _require_core(profile: Profile):
    if profile.ground.items != ITEMS or profile.n != 3:
        raise GroundSetMismatch(
            f"case analysis needs 3 agents over {ITEMS}, got {profile.n} over {profile.ground.items}"
        )


def _holder(masks, item_mask) -> int:
    return next(a for a, X in enumerate(masks) if X & item_mask)


def case_of(X: Allocation) -> str:
    masks = X.bundles
    counts = [popcount(Xa & ALL_SPECIALS) for Xa in masks]
    if max(counts) >= 2:
        return "two-specials"
    if any(Xa & special(a) for a, Xa in enumerate(masks)):
        return "matching-special"
    return "derangement"


class _Prescriber:
    """Builds the prescribed (envier, item, rival) triple for one allocation."""

    def __init__(self, tables, masks):
        self.t = tables
        self.X = masks

    def residual(self, i, e):
        return self.t[i][self.X[i] ^ (1 << e)]

    def cost(self, i, j):
        return self.t[i][self.X[j]]

    def violates(self, i, e, j) -> bool:
        return self.residual(i, e) > self.cost(i, j)

    def first_item(self, i, j, among: int) -> Optional[int]:
        """First item of ``X_i`` within ``among`` whose removal still leaves envy toward ``j``."""
        for e in iter_bits(self.X[i] & among):
            if self.violates(i, e, j):
                return e
        return None

    def first_rival(self, i, e) -> Optional[int]:
        for j in range(3):
            if j != i and self.violates(i, e, j):
                return j
        return None

    def triple(self):
        X = self.X
        counts = [popcount(Xa & ALL_SPECIALS) for Xa in X]
        if max(counts) >= 2:
            return self._two_specials(counts.index(max(counts)))
        owner = next((a for a in range(3) if X[a] & special(a)), None)
        if owner is not None:
            return self._matching(owner)
        return self._derangement()

    def _bit(self, mask) -> int:
        return next(iter_bits(mask))

    def _two_specials(self, a):
        X = self.X
        rest = others(a)
        if X[a] & rest == rest:
            if X[a] != rest:
                # drop an item outside B_{-a}: the residual stays triggered
                e = self._bit(X[a] & ~rest)
                return a, e, self.first_rival(a, e)
            # X_a = B_{-a} costs 0 to both other agents; one of them holds two chores
            r = next(b for b in range(3) if b != a and popcount(X[b]) >= 2)
            return r, self.first_item(r, a, X[r]), a
        # a holds b_a and exactly one other special chore b_x
        bx = X[a] & rest
        x = SPECIALS.index(bx)
        if X[a] & ORDINARY:
            return a, self._bit(bx), self.first_rival(a, self._bit(bx))
        y = 3 - a - x
        # X_a = {b_a, b_x} costs 0 to agent x
        if popcount(X[x]) >= 2:
            return x, self.first_item(x, a, X[x]), a
        if X[x] == special(y):
            # agent y holds all of A; drop a light chore
            return y, self.first_item(y, x, ORDINARY & ~H), x
        # agent y holds b_y with at least two ordinary chores
        return y, self.first_item(y, x, ORDINARY), x

    def _matching(self, a):
        X = self.X
        ordinary = X[a] & ORDINARY
        if popcount(ordinary) >= 2:
            e = self._bit(ordinary)
            return a, e, self.first_rival(a, e)
        if not ordinary:
            r = next(b for b in range(3) if b != a and popcount(X[b] & ORDINARY) >= 2)
            return r, self.first_item(r, a, X[r]), a
        e = self._bit(special(a))
        if ordinary == H:
            return a, e, self.first_rival(a, e)
        # X_a = {b_a, light}: the holder of h drops its special chore and envies a
        r = _holder(X, H)
        return r, self._bit(X[r] & ALL_SPECIALS), a

    def _derangement(self):
        X = self.X
        r = _holder(X, H)
        e = self._bit(X[r] & ALL_SPECIALS)
        j = next(b for b in range(3) if b != r and not X[b] & special(r))
        return r, e, j


def proof_witness(profile: Profile, X: Allocation) -> Optional[ViolationWitness]:
    """The triple the case argument prescribes for ``X``, with its ratio on ``profile``.

    Returns None when the argument's choice is undefined for this profile
    (a step that needs a strict violation finds none).
    """
    _require_core(profile)
    tables = profile.tables()
    masks = X.bundles
    i, e, j = _Prescriber(tables, masks).triple()
    if e is None or j is None:
        return None
    residual = tables[i][masks[i] ^ (1 << e)]
    reference = tables[i][masks[j]]
    return ViolationWitness(i, e, j, residual, reference, ev_ratio(residual, reference))


@dataclass
class CaseReport:
    case: str
    count: int
    passed: bool
    min_ratio: Optional[ExtendedValue]
    witnesses: dict[Allocation, Optional[ViolationWitness]] = field(default_factory=dict)
    failures: list[Allocation] = field(default_factory=list)


def check_case(profile: Profile, case: str) -> CaseReport:
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; choose from {CASES}")
    _require_core(profile)
    witnesses: dict[Allocation, Optional[ViolationWitness]] = {}
    failures = []
    min_ratio = None
    for X in enumerate_allocations(3, GROUND):
        if case_of(X) != case:
            continue
        w = proof_witness(profile, X)
        witnesses[X] = w
        if w is None or not w.ratio > ONE:
            failures.append(X)
        if w is not None and (min_ratio is None or w.ratio < min_ratio):
            min_ratio = w.ratio
    return CaseReport(case, len(witnesses), not failures, min_ratio, witnesses, failures)


def check_case_two_specials(profile: Profile) -> CaseReport:
    return check_case(profile, "two-specials")


def check_case_matching_special(profile: Profile) -> CaseReport:
    return check_case(profile, "matching-special")


def check_case_derangement(profile: Profile) -> CaseReport:
    return check_case(profile, "derangement")


# ---------------------------------------------------------------------------
# coverage value table

LEVEL_TABLE: dict[int, frozenset[int]] = {
    0: frozenset({0, 6, 10, 13}),
    1: frozenset({14, 17}),
    2: frozenset({18, 19}),
    3: frozenset({20}),
}
LEVEL_GAPS = (Fraction(14, 13), Fraction(18, 17), Fraction(20, 19))


@dataclass
class LevelTableReport:
    passed: bool
    images: list[dict[int, list[ExactValue]]]
    gaps: list[list[ExactValue]]
    min_gap: Optional[ExactValue]
    mismatches: list[str] = field(default_factory=list)


def check_level_table(inst: NamedInstance | Profile) -> LevelTableReport:
    """Per agent, the set of values on each four-level class, and the ratios between classes."""
    profile = inst.profile if isinstance(inst, NamedInstance) else inst
    _require_core(profile)
    mismatches = []
    images = []
    gaps_all: list[list[ExactValue]] = []
    for i, f in enumerate(profile.agents):
        image: dict[int, set] = {lvl: set() for lvl in range(4)}
        for S, v in enumerate(f.table):
            lvl = four_level(i, S)
            image[lvl].add(v)
            expected = LEVEL_TABLE[lvl]
            if not (v.is_rational and v.to_fraction() in expected):
                mismatches.append(
                    f"agent {i}: bundle {GROUND.names(S)} at level {lvl} has value {v}"
                )
        for lvl, expected in LEVEL_TABLE.items():
            missing = expected - {v.to_fraction() for v in image[lvl] if v.is_rational}
            if missing:
                mismatches.append(f"agent {i}: level {lvl} never takes values {sorted(missing)}")
        gaps = [min(image[lvl + 1]) / max(image[lvl]) for lvl in range(3)]
        gaps_all.append(gaps)
        if gaps != [ExactValue(g) for g in LEVEL_GAPS]:
            mismatches.append(f"agent {i}: adjacent gaps {[str(g) for g in gaps]}")
        images.append({lvl: sorted(vals) for lvl, vals in image.items()})
    min_gap = min(g for gaps in gaps_all for g in gaps)
    if min_gap != ExactValue(Fraction(20, 19)):
        mismatches.append(f"minimum gap {min_gap} differs from 20/19")
    return LevelTableReport(not mismatches, images, gaps_all, min_gap, mismatches)
