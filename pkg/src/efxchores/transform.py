"""Rank compression, coverage construction and ordinal/cardinal separation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .numeric import ExactValue, ev, ev_ratio
from .setfn import (
    MAX_PAIR_SCAN_ITEMS,
    ClassReport,
    Coverage,
    GroundSet,
    Leveled,
    Profile,
    SetFunction,
    SizeLimitError,
    _as_mask,
    check_monotone,
    distinct_values,
)

__all__ = [
    "NotMonotoneError",
    "SeparationBrokenError",
    "RankTable",
    "rank_table",
    "compression_base",
    "rank_compress",
    "coverage_from_atoms",
    "separation_factor",
]


class NotMonotoneError(ValueError):
    def __init__(self, agent: int, report: ClassReport):
        super().__init__(f"agent {agent} cost function is not monotone: {report.witness}")
        self.agent = agent
        self.report = report


class SeparationBrokenError(ValueError):
    pass


@dataclass(frozen=True)
class RankTable:
    """Sorted distinct nonempty values of one agent and the rank of every nonempty bundle.

    ``ranks[0]`` (the empty bundle) is ``-1``.
    """

    values: tuple[ExactValue, ...]
    ranks: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.values)


def rank_table(f: SetFunction) -> RankTable:
    values = distinct_values(f)
    index = {v: r for r, v in enumerate(values)}
    ranks = (-1,) + tuple(index[v] for v in f.table[1:])
    return RankTable(tuple(values), ranks)


def compression_base(levels: int) -> ExactValue:
    """``2^(1/(L-1))``, the factor separating adjacent compressed ranks."""
    if levels < 2:
        raise ValueError(f"level count must be at least 2, got {levels}")
    return ExactValue(1, Fraction(1, levels - 1))


def rank_compress(profile: Profile, level_bound: Optional[int] = None) -> Profile:
    """Replace each agent's cost by ``1/2 * lam^rank`` on nonempty bundles, ``0`` on the empty one.

    ``lam = 2^(1/(L-1))`` with ``L`` the common level bound (default: the
    largest per-agent count of distinct nonempty values).
    """
    if profile.polarity != "chores":
        raise ValueError("rank compression is defined for chores")
    for i, f in enumerate(profile.agents):
        report = check_monotone(f)
        if not report.holds:
            raise NotMonotoneError(i, report)
    tables = [rank_table(f) for f in profile.agents]
    needed = max((t.count for t in tables), default=0)
    if level_bound is None:
        L = needed
    elif level_bound < needed:
        raise ValueError(f"level bound {level_bound} is below the {needed} levels present")
    else:
        L = level_bound
    if L < 2:
        raise ValueError("rank compression needs L >= 2")
    step = Fraction(1, L - 1)
    agents = []
    for t in tables:
        level_values = (ExactValue(0),) + tuple(
            ExactValue(Fraction(1, 2), r * step) for r in range(t.count)
        )
        agents.append(Leveled(profile.ground, tuple(r + 1 for r in t.ranks), level_values))
    return Profile(profile.ground, tuple(agents), "chores")


def coverage_from_atoms(ground: GroundSet, atoms: Iterable) -> Coverage:
    """Build a weighted coverage function from ``(bundle, weight)`` pairs."""
    parsed = []
    for bundle, weight in atoms:
        w = ev(weight) if not isinstance(weight, ExactValue) else weight
        if isinstance(weight, (int, Fraction)) and weight < 0:
            raise ValueError(f"negative coverage weight {weight}")
        parsed.append((_as_mask(ground, bundle), w.to_fraction()))
    return Coverage(ground, tuple(parsed))


def separation_factor(ordinal: Profile, cardinal: Profile) -> ExactValue:
    """Smallest ``c_i(S) / c_i(T)`` over agents and pairs with ``d_i(S) > d_i(T)``, ``c_i(T) > 0``.

    Pairs with ``c_i(T) = 0`` are skipped but must have ``c_i(S) > 0``.
    Raises :class:`SeparationBrokenError` when that fails, or when no pair
    with a positive denominator exists.
    """
    if ordinal.ground != cardinal.ground or ordinal.n != cardinal.n:
        raise ValueError("ordinal and cardinal profiles differ in ground set or agent count")
    if ordinal.m > MAX_PAIR_SCAN_ITEMS:
        raise SizeLimitError(f"separation scan over {ordinal.m} items refused")
    best = None
    for i, (d, c) in enumerate(zip(ordinal.agents, cardinal.agents)):
        # bundles with equal (d, c) are interchangeable, so scan distinct pairs
        points: dict[tuple[ExactValue, ExactValue], int] = {}
        for S, (dv, cv) in enumerate(zip(d.table, c.table)):
            points.setdefault((dv, cv), S)
        for (ds, cs), S in sorted(points.items(), key=lambda kv: kv[1]):
            for (dt, ct), T in sorted(points.items(), key=lambda kv: kv[1]):
                if not ds > dt:
                    continue
                if ct.is_zero:
                    if cs.is_zero:
                        raise SeparationBrokenError(
                            f"agent {i}: d(S) > d(T) but c(S) = c(T) = 0 "
                            f"(S={ordinal.ground.names(S)}, T={ordinal.ground.names(T)})"
                        )
                    continue
                ratio = ev_ratio(cs, ct)
                if best is None or ratio < best:
                    best = ratio
    if best is None:
        raise SeparationBrokenError("no ordinally separated pair with positive rival cost")
    return best
