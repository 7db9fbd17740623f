"""Bundles, set-function representations and exhaustive class checkers.

Bundles are bitmasks over a :class:`GroundSet`; bit ``k`` is the item at
index ``k``.  Every representation exposes ``value(mask)`` and a cached
``table`` of all ``2^m`` values, which is what the checkers scan.

Checkers report the lexicographically first violation in mask order, so
witnesses are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Union

from .numeric import ExactValue, Ordering, compare_sums, ev

__all__ = [
    "MAX_ITEMS",
    "MAX_PAIR_SCAN_ITEMS",
    "SizeLimitError",
    "GroundSet",
    "Bundle",
    "SetFunction",
    "DenseTable",
    "Additive",
    "Coverage",
    "Leveled",
    "CS24Cost",
    "Profile",
    "ClassReport",
    "evaluate",
    "check_normalized",
    "check_monotone",
    "check_subadditive",
    "check_submodular",
    "check_submodular_marginal",
    "check_superadditive",
    "distinct_values",
    "to_dense",
    "popcount",
    "iter_bits",
]

MAX_ITEMS = 20
MAX_PAIR_SCAN_ITEMS = 13


class SizeLimitError(ValueError):
    """An exhaustive scan was requested above its size limit."""


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def iter_bits(mask: int):
    """Yield the item indices set in ``mask`` in increasing order."""
    k = 0
    while mask:
        if mask & 1:
            yield k
        mask >>= 1
        k += 1


@dataclass(frozen=True)
class GroundSet:
    items: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if len(set(self.items)) != len(self.items):
            raise ValueError(f"duplicate item names in {self.items}")
        if len(self.items) > MAX_ITEMS:
            raise SizeLimitError(f"ground set has {len(self.items)} items; limit is {MAX_ITEMS}")

    @property
    def m(self) -> int:
        return len(self.items)

    @property
    def full(self) -> int:
        return (1 << len(self.items)) - 1

    def index(self, name: str) -> int:
        try:
            return self.items.index(name)
        except ValueError:
            raise KeyError(f"unknown item {name!r}") from None

    def mask(self, names: Iterable[str]) -> int:
        out = 0
        for name in names:
            out |= 1 << self.index(name)
        return out

    def names(self, mask: int) -> list[str]:
        return [self.items[k] for k in iter_bits(mask)]

    def bundle(self, names: Iterable[str] = ()) -> "Bundle":
        return Bundle(self, self.mask(names))


@dataclass(frozen=True)
class Bundle:
    ground: GroundSet
    mask: int = 0

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.ground.m:
            raise ValueError(f"mask {self.mask:#x} has bits outside a {self.ground.m}-item ground set")

    @property
    def items(self) -> list[str]:
        return self.ground.names(self.mask)

    def __contains__(self, name: str) -> bool:
        return bool(self.mask >> self.ground.index(name) & 1)

    def __len__(self) -> int:
        return popcount(self.mask)

    def __str__(self):
        return "{" + ", ".join(self.items) + "}"


BundleLike = Union[Bundle, int, Iterable[str]]


def _as_mask(ground: GroundSet, S: BundleLike) -> int:
    if isinstance(S, Bundle):
        if S.ground != ground:
            raise ValueError("bundle is over a different ground set")
        return S.mask
    if isinstance(S, int):
        if S < 0 or S >> ground.m:
            raise ValueError(f"mask {S:#x} out of range")
        return S
    if isinstance(S, str):
        return ground.mask([S])
    return ground.mask(S)


def _rational(x, what: str) -> Fraction:
    value = ev(x)
    if not value.is_rational:
        raise ValueError(f"{what} must be rational, got {value}")
    return value.to_fraction()


class SetFunction:
    """Base class: subclasses define ``ground`` and ``value(mask)``."""

    ground: GroundSet
    repr_tag: str = ""

    def value(self, mask: int) -> ExactValue:
        raise NotImplementedError

    @cached_property
    def table(self) -> tuple[ExactValue, ...]:
        return tuple(self.value(mask) for mask in range(1 << self.ground.m))

    def __call__(self, S: BundleLike) -> ExactValue:
        return self.table[_as_mask(self.ground, S)]

    def extend(self, ground: GroundSet) -> "SetFunction":
        """Same function on a larger ground set, ignoring the new items."""
        raise NotImplementedError


def _check_prefix(old: GroundSet, new: GroundSet):
    if new.items[: old.m] != old.items:
        raise ValueError("extended ground set must start with the original items")


@dataclass(frozen=True, eq=True)
class DenseTable(SetFunction):
    ground: GroundSet
    values: tuple[ExactValue, ...]
    repr_tag = "dense"

    def __post_init__(self):
        values = tuple(ev(v) for v in self.values)
        if len(values) != 1 << self.ground.m:
            raise ValueError(f"dense table needs {1 << self.ground.m} values, got {len(values)}")
        object.__setattr__(self, "values", values)

    def value(self, mask: int) -> ExactValue:
        return self.values[mask]

    @cached_property
    def table(self):
        return self.values

    def extend(self, ground):
        _check_prefix(self.ground, ground)
        core = self.ground.full
        return DenseTable(ground, tuple(self.values[s & core] for s in range(1 << ground.m)))


@dataclass(frozen=True, eq=True)
class Additive(SetFunction):
    """``f(S) = sum of per-item weights``; weights are rational."""

    ground: GroundSet
    weights: tuple[Fraction, ...]
    repr_tag = "additive"

    def __post_init__(self):
        weights = tuple(_rational(w, "additive weight") for w in self.weights)
        if len(weights) != self.ground.m:
            raise ValueError(f"additive function needs {self.ground.m} weights, got {len(weights)}")
        if any(w < 0 for w in weights):
            raise ValueError("additive weights must be nonnegative")
        object.__setattr__(self, "weights", weights)

    def value(self, mask):
        return ExactValue(sum((self.weights[k] for k in iter_bits(mask)), Fraction(0)))

    def extend(self, ground):
        _check_prefix(self.ground, ground)
        return Additive(ground, self.weights + (Fraction(0),) * (ground.m - self.ground.m))


@dataclass(frozen=True, eq=True)
class Coverage(SetFunction):
    """Weighted coverage: sum of the weights of atoms that meet ``S``."""

    ground: GroundSet
    atoms: tuple[tuple[int, Fraction], ...]
    repr_tag = "coverage"

    def __post_init__(self):
        atoms = []
        for atom, weight in self.atoms:
            w = _rational(weight, "coverage weight")
            if w < 0:
                raise ValueError(f"negative coverage weight {w}")
            if atom < 0 or atom >> self.ground.m:
                raise ValueError(f"atom mask {atom:#x} out of range")
            atoms.append((atom, w))
        object.__setattr__(self, "atoms", tuple(atoms))

    def value(self, mask):
        return ExactValue(sum((w for atom, w in self.atoms if atom & mask), Fraction(0)))

    def extend(self, ground):
        _check_prefix(self.ground, ground)
        return Coverage(ground, self.atoms)


@dataclass(frozen=True, eq=True)
class Leveled(SetFunction):
    """``f(S) = level_values[levels[S]]`` with strictly increasing level values."""

    ground: GroundSet
    levels: tuple[int, ...]
    level_values: tuple[ExactValue, ...]
    repr_tag = "leveled"

    def __post_init__(self):
        levels = tuple(int(x) for x in self.levels)
        values = tuple(ev(v) for v in self.level_values)
        if len(levels) != 1 << self.ground.m:
            raise ValueError(f"level map needs {1 << self.ground.m} entries, got {len(levels)}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("level values must be strictly increasing")
        if levels and (min(levels) < 0 or max(levels) >= len(values)):
            raise ValueError("level index out of range")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "level_values", values)

    def value(self, mask):
        return self.level_values[self.levels[mask]]

    def level(self, S: BundleLike) -> int:
        return self.levels[_as_mask(self.ground, S)]

    def extend(self, ground):
        _check_prefix(self.ground, ground)
        core = self.ground.full
        return Leveled(ground, tuple(self.levels[s & core] for s in range(1 << ground.m)), self.level_values)


CS24_ITEMS = ("h", "l1", "l2", "b1", "b2", "b3")


@dataclass(frozen=True, eq=True)
class CS24Cost(SetFunction):
    """Agent ``agent`` (1-based) of the k-parameterized three-agent instance.

    Singletons: ``h -> k``, ``l1, l2 -> 1``, ``b_j -> 0``.  A bundle of two or
    more items costs ``k^2`` when it contains both of the other agents' special
    items, or its own special item together with any of ``h, l1, l2``;
    otherwise it costs the sum of its singletons.  Items outside the six named
    ones are ignored.
    """

    ground: GroundSet
    agent: int
    k: Fraction
    repr_tag = "cs24"

    def __post_init__(self):
        k = _rational(self.k, "k")
        if k <= 2:
            raise ValueError(f"k must exceed 2, got {k}")
        if self.agent not in (1, 2, 3):
            raise ValueError(f"agent must be 1, 2 or 3, got {self.agent}")
        for name in CS24_ITEMS:
            self.ground.index(name)
        object.__setattr__(self, "k", k)

    def value(self, mask):
        g = self.ground
        h, l1, l2, b1, b2, b3 = (1 << g.index(x) for x in CS24_ITEMS)
        ordinary = h | l1 | l2
        special = (b1, b2, b3)
        own = special[self.agent - 1]
        others = (b1 | b2 | b3) & ~own
        S = mask & (ordinary | b1 | b2 | b3)
        if popcount(S) >= 2 and ((S & others) == others or (S & own and S & ordinary)):
            return ExactValue(self.k * self.k)
        total = Fraction(0)
        if S & h:
            total += self.k
        total += bool(S & l1) + bool(S & l2)
        return ExactValue(total)

    def extend(self, ground):
        _check_prefix(self.ground, ground)
        return CS24Cost(ground, self.agent, self.k)


@dataclass(frozen=True)
class Profile:
    ground: GroundSet
    agents: tuple[SetFunction, ...]
    polarity: str = "chores"

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if self.polarity not in ("chores", "goods"):
            raise ValueError(f"polarity must be 'chores' or 'goods', got {self.polarity!r}")
        for f in self.agents:
            if f.ground != self.ground:
                raise ValueError("all agents must share the profile's ground set")

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def m(self) -> int:
        return self.ground.m

    def tables(self) -> list[tuple[ExactValue, ...]]:
        return [f.table for f in self.agents]


def evaluate(f: SetFunction, S: BundleLike) -> ExactValue:
    return f(S)


# ---------------------------------------------------------------------------
# class checkers

@dataclass
class ClassReport:
    property: str
    holds: bool
    witness: dict | None = None

    def to_json(self, ground: GroundSet) -> dict:
        out = {"property": self.property, "holds": self.holds, "witness": None}
        if self.witness is not None:
            w = {}
            for key, val in self.witness.items():
                if key == "values":
                    w[key] = {k: str(v) for k, v in val.items()}
                elif key == "item":
                    w[key] = ground.items[val]
                else:
                    w[key] = ground.names(val)
            out["witness"] = w
        return out


def _require_pair_scan(f: SetFunction):
    if f.ground.m > MAX_PAIR_SCAN_ITEMS:
        raise SizeLimitError(
            f"pair scan over {f.ground.m} items refused; limit is {MAX_PAIR_SCAN_ITEMS}"
        )


def check_normalized(f: SetFunction) -> ClassReport:
    v = f.table[0]
    if v.is_zero:
        return ClassReport("normalized", True)
    return ClassReport("normalized", False, {"S": 0, "values": {"f(S)": v}})


def check_monotone(f: SetFunction) -> ClassReport:
    """Scan every edge ``S -> S + e``; first violation by (S, e)."""
    t = f.table
    m = f.ground.m
    for S in range(1 << m):
        for e in range(m):
            bit = 1 << e
            if S & bit:
                continue
            if t[S | bit] < t[S]:
                return ClassReport(
                    "monotone", False,
                    {"S": S, "item": e, "values": {"f(S)": t[S], "f(S+e)": t[S | bit]}},
                )
    return ClassReport("monotone", True)


def check_subadditive(f: SetFunction) -> ClassReport:
    _require_pair_scan(f)
    t = f.table
    n = 1 << f.ground.m
    # the inequality is symmetric in (S, T), so the first violation has S <= T
    for S in range(n):
        for T in range(S, n):
            U = S | T
            if compare_sums((t[S], t[T]), (t[U],)) is Ordering.LESS:
                return ClassReport(
                    "subadditive", False,
                    {"S": S, "T": T, "values": {"f(S)": t[S], "f(T)": t[T], "f(S|T)": t[U]}},
                )
    return ClassReport("subadditive", True)


def check_submodular(f: SetFunction) -> ClassReport:
    """Lattice form ``f(S) + f(T) >= f(S | T) + f(S & T)``."""
    _require_pair_scan(f)
    t = f.table
    n = 1 << f.ground.m
    for S in range(n):
        for T in range(S + 1, n):
            U, I = S | T, S & T
            if U == T or U == S:
                continue  # nested pairs hold with equality
            if compare_sums((t[S], t[T]), (t[U], t[I])) is Ordering.LESS:
                return ClassReport(
                    "submodular", False,
                    {"S": S, "T": T, "values": {
                        "f(S)": t[S], "f(T)": t[T], "f(S|T)": t[U], "f(S&T)": t[I]}},
                )
    return ClassReport("submodular", True)


def check_submodular_marginal(f: SetFunction) -> ClassReport:
    """Decreasing-marginal form: ``f(S+e) - f(S) >= f(T+e) - f(T)`` for ``S <= T``, ``e`` not in ``T``."""
    _require_pair_scan(f)
    t = f.table
    m = f.ground.m
    full = f.ground.full
    for T in range(1 << m):
        S = T
        while True:
            for e in iter_bits(full & ~T):
                bit = 1 << e
                if compare_sums((t[S | bit], t[T]), (t[S], t[T | bit])) is Ordering.LESS:
                    return ClassReport(
                        "submodular", False,
                        {"S": S, "T": T, "item": e, "values": {
                            "f(S)": t[S], "f(S+e)": t[S | bit], "f(T)": t[T], "f(T+e)": t[T | bit]}},
                    )
            if S == 0:
                break
            S = (S - 1) & T
    return ClassReport("submodular", True)


def check_superadditive(f: SetFunction) -> ClassReport:
    """``f(S | T) >= f(S) + f(T)`` for disjoint ``S``, ``T``."""
    _require_pair_scan(f)
    t = f.table
    n = 1 << f.ground.m
    for S in range(n):
        for T in range(S, n):
            if S & T:
                continue
            U = S | T
            if compare_sums((t[U],), (t[S], t[T])) is Ordering.LESS:
                return ClassReport(
                    "superadditive", False,
                    {"S": S, "T": T, "values": {"f(S)": t[S], "f(T)": t[T], "f(S|T)": t[U]}},
                )
    return ClassReport("superadditive", True)


def distinct_values(f: SetFunction) -> list[ExactValue]:
    """Sorted distinct values over nonempty bundles."""
    return sorted(set(f.table[1:]))


def to_dense(f: SetFunction) -> DenseTable:
    if isinstance(f, DenseTable):
        return f
    return DenseTable(f.ground, f.table)
