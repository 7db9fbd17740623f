"""Seeded search for ordinal chores profiles that admit no EFX allocation.

Candidates are integer level maps (``rho(empty) = 0``, monotone under
inclusion, values in ``0..L-1``).  A candidate is screened with a fast
integer EFX-existence sweep; survivors are re-verified with
:func:`efx.check_no_efx` and returned with that certificate.

Only the ``exhaustive-small`` generator can refute a search space; the
others report ``budget-exhausted`` or ``generator-exhausted`` and never
claim non-existence.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .efx import NoEFXResult, check_no_efx
from .numeric import ExactValue
from .setfn import GroundSet, Leveled, Profile, iter_bits

__all__ = [
    "GENERATORS",
    "SearchSpec",
    "Obstruction",
    "MineReport",
    "PerturbationRejected",
    "InfeasibleSpec",
    "leveled_profile",
    "perturb_levels",
    "monotone_level_maps",
    "random_level_map",
    "has_efx",
    "mine",
]

GENERATORS = ("exhaustive-small", "perturb-instance", "random-monotone")


class InfeasibleSpec(ValueError):
    pass


class PerturbationRejected(ValueError):
    def __init__(self, message: str, edge=None):
        super().__init__(message)
        self.edge = edge


@dataclass(frozen=True)
class SearchSpec:
    n: int
    ground: GroundSet
    levels: int
    generator: str
    seed: int = 0
    budget: int = 10_000
    base: Optional[Profile] = None
    max_flips: int = 2
    item_symmetry: Optional[bool] = None

    def validate(self):
        if self.generator not in GENERATORS:
            raise InfeasibleSpec(f"unknown generator {self.generator!r}")
        if self.n < 1 or self.levels < 1 or self.budget < 0:
            raise InfeasibleSpec("n and levels must be positive, budget nonnegative")
        if self.generator == "exhaustive-small" and self.ground.m > 4:
            raise InfeasibleSpec("exhaustive-small requires at most 4 items")
        if self.generator == "perturb-instance":
            if self.base is None:
                raise InfeasibleSpec("perturb-instance requires a base profile")
            if self.base.ground != self.ground or self.base.n != self.n:
                raise InfeasibleSpec("base profile does not match n / ground set")


@dataclass
class Obstruction:
    profile: Profile
    level_counts: tuple[int, ...]
    implied_bound: ExactValue
    certificate: NoEFXResult

    @property
    def encoding(self) -> tuple[tuple[int, ...], ...]:
        return tuple(f.levels for f in self.profile.agents)


@dataclass
class MineReport:
    obstructions: list[Obstruction]
    examined: int
    status: str
    spec: SearchSpec = field(repr=False)

    @property
    def refuted(self) -> bool:
        """True only when an exhaustive generator covered its whole space and found nothing."""
        return self.status == "exhaustive-complete" and not self.obstructions

    def __iter__(self):
        return iter(self.obstructions)

    def __len__(self):
        return len(self.obstructions)


def leveled_profile(ground: GroundSet, level_maps: Sequence[Sequence[int]]) -> Profile:
    """Profile whose agent values equal their integer levels."""
    agents = []
    for levels in level_maps:
        top = max(levels)
        agents.append(Leveled(ground, tuple(levels), tuple(ExactValue(v) for v in range(top + 1))))
    return Profile(ground, tuple(agents), "chores")


def _monotone_violation(levels: Sequence[int], m: int):
    for S in range(1 << m):
        for e in range(m):
            bit = 1 << e
            if not S & bit and levels[S | bit] < levels[S]:
                return S, e
    return None


def perturb_levels(base: Profile, flips: Sequence[tuple[int, object, int]]) -> Profile:
    """Apply ``(agent, bundle, new_level)`` flips to a leveled profile.

    Bundles may be masks or item-name iterables.  The empty bundle stays at
    level 0; results that break monotonicity are rejected with the edge.
    """
    maps = [list(f.levels) for f in base.agents]
    if not all(isinstance(f, Leveled) for f in base.agents):
        raise TypeError("perturb_levels needs a profile of Leveled functions")
    tops = [len(f.level_values) - 1 for f in base.agents]
    for agent, bundle, level in flips:
        S = bundle if isinstance(bundle, int) else base.ground.mask(bundle)
        if S == 0 and level != 0:
            raise PerturbationRejected("the empty bundle is fixed at level 0", (0, None))
        if level < 0:
            raise PerturbationRejected(f"level {level} is negative")
        maps[agent][S] = level
        tops[agent] = max(tops[agent], level)
    for agent, levels in enumerate(maps):
        edge = _monotone_violation(levels, base.ground.m)
        if edge is not None:
            S, e = edge
            raise PerturbationRejected(
                f"agent {agent}: level drops from {base.ground.names(S)} to adding "
                f"{base.ground.items[e]}",
                (agent, S, e),
            )
    agents = []
    for f, levels, top in zip(base.agents, maps, tops):
        values = f.level_values
        if top >= len(values):
            # integer levels beyond the original value list continue the integers
            values = values + tuple(ExactValue(v) for v in range(len(values), top + 1))
        agents.append(Leveled(base.ground, tuple(levels), values))
    return Profile(base.ground, tuple(agents), base.polarity)


# ---------------------------------------------------------------------------
# generators

def monotone_level_maps(m: int, levels: int) -> Iterator[tuple[int, ...]]:
    """All monotone maps ``2^[m] -> 0..levels-1`` with the empty set at 0, lexicographically."""
    n = 1 << m
    out = [0] * n

    def rec(S):
        if S == n:
            yield tuple(out)
            return
        lo = max(out[S ^ (1 << e)] for e in iter_bits(S))
        for v in range(lo, levels):
            out[S] = v
            yield from rec(S + 1)

    yield from rec(1)


def random_level_map(m: int, levels: int, rng: random.Random) -> tuple[int, ...]:
    out = [0] * (1 << m)
    for S in range(1, 1 << m):
        lo = max(out[S ^ (1 << e)] for e in iter_bits(S))
        out[S] = rng.randint(lo, levels - 1)
    return tuple(out)


def _exhaustive(spec: SearchSpec):
    maps = list(itertools.islice(monotone_level_maps(spec.ground.m, spec.levels), spec.budget + 1))
    # agents are interchangeable, so multisets of maps cover every profile up to relabelling
    return itertools.combinations_with_replacement(maps, spec.n), len(maps) > spec.budget


def _random(spec: SearchSpec):
    rng = random.Random(spec.seed)
    m = spec.ground.m
    while True:
        yield tuple(random_level_map(m, spec.levels, rng) for _ in range(spec.n))


def _perturbed(spec: SearchSpec):
    base = spec.base
    yield tuple(f.levels for f in base.agents)
    if spec.max_flips <= 0:
        return
    rng = random.Random(spec.seed)
    nonempty = range(1, 1 << spec.ground.m)
    while True:
        flips = [
            (rng.randrange(spec.n), rng.choice(nonempty), rng.randrange(spec.levels))
            for _ in range(rng.randint(1, spec.max_flips))
        ]
        try:
            yield tuple(f.levels for f in perturb_levels(base, flips).agents)
        except PerturbationRejected:
            yield None


# ---------------------------------------------------------------------------
# screening

def _word_masks(word, n):
    masks = [0] * n
    for k, a in enumerate(word):
        masks[a] |= 1 << k
    return masks


def has_efx(level_maps: Sequence[Sequence[int]], m: int) -> bool:
    """Integer-only EFX existence test over all allocations."""
    n = len(level_maps)
    for word in itertools.product(range(n), repeat=m):
        masks = _word_masks(word, n)
        ok = True
        for i in range(n):
            t = level_maps[i]
            Xi = masks[i]
            if not Xi:
                continue
            worst = max(t[Xi ^ (1 << e)] for e in iter_bits(Xi))
            if any(worst > t[masks[j]] for j in range(n) if j != i):
                ok = False
                break
        if ok:
            return True
    return False


def _permute_map(levels: Sequence[int], perm: Sequence[int], m: int) -> tuple[int, ...]:
    out = [0] * (1 << m)
    for S in range(1 << m):
        T = 0
        for k in iter_bits(S):
            T |= 1 << perm[k]
        out[T] = levels[S]
    return tuple(out)


def _canonical(maps: Sequence[tuple[int, ...]], m: int, item_symmetry: bool):
    if not item_symmetry:
        return tuple(sorted(maps))
    return min(
        tuple(sorted(_permute_map(t, perm, m) for t in maps))
        for perm in itertools.permutations(range(m))
    )


def _level_count(levels: Sequence[int]) -> int:
    return len(set(levels[1:]))


def mine(spec: SearchSpec) -> MineReport:
    spec.validate()
    m = spec.ground.m
    item_symmetry = spec.item_symmetry if spec.item_symmetry is not None else m <= 5
    if spec.generator == "exhaustive-small":
        candidates, truncated = _exhaustive(spec)
    elif spec.generator == "random-monotone":
        candidates, truncated = _random(spec), True
    else:
        candidates, truncated = _perturbed(spec), True

    found: set[tuple] = set()
    examined = 0
    status = "exhaustive-complete" if spec.generator == "exhaustive-small" else "generator-exhausted"
    for maps in candidates:
        if examined >= spec.budget:
            status = "budget-exhausted"
            break
        examined += 1
        if maps is None:
            continue
        counts = tuple(_level_count(t) for t in maps)
        if max(counts) > spec.levels:
            continue
        if has_efx(maps, m):
            continue
        found.add(_canonical(maps, m, item_symmetry))
    else:
        if spec.generator == "exhaustive-small" and truncated:
            status = "budget-exhausted"

    obstructions = []
    for maps in sorted(found, key=lambda k: (max(_level_count(t) for t in k), k)):
        profile = leveled_profile(spec.ground, maps)
        certificate = check_no_efx(profile)
        if not certificate.holds:
            raise AssertionError("screened obstruction failed certification")
        counts = tuple(_level_count(t) for t in maps)
        L = max(2, max(counts))
        obstructions.append(
            Obstruction(profile, counts, ExactValue(1, Fraction(1, L - 1)), certificate)
        )
    return MineReport(obstructions, examined, status, spec)
