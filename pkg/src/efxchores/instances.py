"""Builders for the three-agent, six-chore instances and their variants.

All instances share the item order ``(h, l1, l2, b1, b2, b3)``: one heavy
ordinary chore, two light ordinary chores and one special chore per agent.
Agents are 0-based in code; agent ``i`` owns special chore ``b{i+1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .numeric import ExactValue, ev
from .setfn import CS24_ITEMS, CS24Cost, Coverage, GroundSet, Leveled, Profile

__all__ = [
    "ITEMS",
    "GROUND",
    "NamedInstance",
    "special",
    "others",
    "four_level",
    "build_cs24",
    "build_warmup_compressed",
    "build_four_level_ordinal",
    "build_four_level_compressed",
    "build_coverage_20_19",
    "coverage_atoms",
    "extend_with_dummies",
    "BUILDERS",
    "build",
]

ITEMS = CS24_ITEMS
GROUND = GroundSet(ITEMS)

H, L1, L2, B1, B2, B3 = (1 << k for k in range(6))
ORDINARY = H | L1 | L2
LIGHT = L1 | L2
SPECIALS = (B1, B2, B3)


def special(agent: int) -> int:
    """Mask of agent's own special chore."""
    return SPECIALS[agent]


def others(agent: int) -> int:
    """Mask of the two special chores not owned by ``agent``."""
    return (B1 | B2 | B3) & ~SPECIALS[agent]


@dataclass(frozen=True)
class NamedInstance:
    id: str
    profile: Profile
    provenance: str = ""
    claimed_bound: Optional[ExactValue] = None


def four_level(agent: int, S: int) -> int:
    """Ordinal level 0..3 of bundle ``S`` (over the six core items) for ``agent``."""
    own, rest = special(agent), others(agent)
    if S & rest == rest or (S & own and S & ORDINARY):
        return 3
    if S & H:
        return 2
    if S & LIGHT:
        return 1
    return 0


def build_cs24(k=3) -> NamedInstance:
    k = Fraction(k) if not isinstance(k, str) else ev(k).to_fraction()
    if k <= 2:
        raise ValueError(f"k must exceed 2, got {k}")
    agents = tuple(CS24Cost(GROUND, i, k) for i in (1, 2, 3))
    return NamedInstance(
        id="cs24",
        profile=Profile(GROUND, agents, "chores"),
        provenance="warm-up instance with penalty k^2 (k > 2)",
    )


def build_four_level_ordinal() -> NamedInstance:
    values = tuple(ExactValue(v) for v in range(4))
    agents = tuple(
        Leveled(GROUND, tuple(four_level(i, S) for S in range(64)), values) for i in range(3)
    )
    return NamedInstance(
        id="fourlevel",
        profile=Profile(GROUND, agents, "chores"),
        provenance="four-level ordinal profile",
    )


def build_warmup_compressed() -> NamedInstance:
    from .transform import rank_compress

    base = build_cs24(3)
    return NamedInstance(
        id="warmup7",
        profile=rank_compress(base.profile, level_bound=7),
        provenance="rank compression of the k=3 warm-up instance with L=7",
        claimed_bound=ExactValue(1, Fraction(1, 6)),
    )


def build_four_level_compressed() -> NamedInstance:
    from .transform import rank_compress

    return NamedInstance(
        id="fourlevel-compressed",
        profile=rank_compress(build_four_level_ordinal().profile, level_bound=4),
        provenance="rank compression of the four-level profile with L=4",
        claimed_bound=ExactValue(1, Fraction(1, 3)),
    )


def coverage_atoms(agent: int) -> list[tuple[int, Fraction]]:
    """The six weighted atoms of the coverage realization for ``agent``."""
    own = special(agent)
    atoms = []
    for b in SPECIALS:
        if b != own:
            atoms.append((ORDINARY | b, Fraction(7)))
    for b in SPECIALS:
        if b != own:
            atoms.append((own | b, Fraction(1)))
    for b in SPECIALS:
        if b != own:
            atoms.append((H | own | b, Fraction(2)))
    return atoms


def build_coverage_20_19() -> NamedInstance:
    agents = tuple(Coverage(GROUND, tuple(coverage_atoms(i))) for i in range(3))
    return NamedInstance(
        id="coverage2019",
        profile=Profile(GROUND, agents, "chores"),
        provenance="weighted-coverage realization of the four-level profile",
        claimed_bound=ExactValue(Fraction(20, 19)),
    )


def extend_with_dummies(inst: NamedInstance, extra: Iterable[str]) -> NamedInstance:
    """Add zero-impact items: every agent evaluates ``S`` as ``S`` minus the new items."""
    extra = list(extra)
    if not extra:
        return inst
    clash = set(extra) & set(inst.profile.ground.items)
    if clash or len(set(extra)) != len(extra):
        raise ValueError(f"duplicate item names: {sorted(clash) or extra}")
    ground = GroundSet(inst.profile.ground.items + tuple(extra))
    agents = tuple(f.extend(ground) for f in inst.profile.agents)
    return replace(
        inst,
        id=f"{inst.id}+{len(extra)}",
        profile=Profile(ground, agents, inst.profile.polarity),
        provenance=f"{inst.provenance}; dummies {','.join(extra)}",
    )


BUILDERS: dict[str, Callable[..., NamedInstance]] = {
    "cs24": build_cs24,
    "warmup7": build_warmup_compressed,
    "fourlevel": build_four_level_ordinal,
    "fourlevel-compressed": build_four_level_compressed,
    "coverage2019": build_coverage_20_19,
}


def build(instance_id: str, k=None, dummies: Iterable[str] = ()) -> NamedInstance:
    try:
        builder = BUILDERS[instance_id]
    except KeyError:
        raise KeyError(f"unknown instance id {instance_id!r}; choose from {sorted(BUILDERS)}") from None
    if k is not None:
        if instance_id != "cs24":
            raise ValueError("--k only applies to cs24")
        inst = builder(k)
    else:
        inst = builder()
    return extend_with_dummies(inst, dummies)
