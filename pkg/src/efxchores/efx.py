"""Allocations, alpha-EFX checks and exact instance thresholds.

An allocation is an assignment word: ``assignment[k]`` is the agent that
receives item ``k``.  Words are enumerated in lexicographic order, which is
also the tie-breaking order for every reported argmin and witness.

The critical ratio of a chores allocation is the smallest ``alpha >= 1``
for which it is alpha-EFX::

    max(1, max_{i, e in X_i, j != i} c_i(X_i - e) / c_i(X_j))

and the instance threshold is the minimum critical ratio over all
allocations.
"""

from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .numeric import ONE, ExactValue, ExtendedValue, ev, ev_ratio
from .setfn import GroundSet, Profile, SizeLimitError, iter_bits

__all__ = [
    "MAX_ALLOCATIONS",
    "Allocation",
    "ViolationWitness",
    "ThresholdReport",
    "NoEFXResult",
    "enumerate_allocations",
    "allocation_count",
    "critical_alpha_chores",
    "critical_witness",
    "is_alpha_efx",
    "instance_threshold",
    "check_no_efx",
    "default_workers",
]

MAX_ALLOCATIONS = 10 ** 8


@dataclass(frozen=True, order=True)
class Allocation:
    assignment: tuple[int, ...]
    n: int

    @classmethod
    def from_bundles(cls, ground: GroundSet, bundles: Sequence) -> "Allocation":
        word = [-1] * ground.m
        for agent, bundle in enumerate(bundles):
            names = [bundle] if isinstance(bundle, str) else bundle
            for name in names:
                k = ground.index(name)
                if word[k] != -1:
                    raise ValueError(f"item {name!r} assigned twice")
                word[k] = agent
        missing = [ground.items[k] for k, a in enumerate(word) if a == -1]
        if missing:
            raise ValueError(f"items not assigned: {missing}")
        return cls(tuple(word), len(bundles))

    @property
    def bundles(self) -> list[int]:
        masks = [0] * self.n
        for k, a in enumerate(self.assignment):
            masks[a] |= 1 << k
        return masks

    @property
    def index(self) -> int:
        """Position in the lexicographic enumeration."""
        out = 0
        for a in self.assignment:
            out = out * self.n + a
        return out

    def named(self, ground: GroundSet) -> list[list[str]]:
        return [ground.names(b) for b in self.bundles]

    def word(self) -> str:
        return "".join(str(a) for a in self.assignment) if self.n <= 10 else ",".join(map(str, self.assignment))


@dataclass(frozen=True)
class ViolationWitness:
    """One (envier, item, rival) triple.

    Chores: ``residual = c_i(X_i - e)``, ``reference = c_i(X_j)``.
    Goods: ``residual = v_i(X_j - g)``, ``reference = v_i(X_i)``.
    ``ratio = residual / reference`` in both cases.
    """

    envier: int
    item: int
    rival: int
    residual: ExactValue
    reference: ExactValue
    ratio: ExtendedValue

    def to_json(self, ground: GroundSet) -> dict:
        return {
            "envier": self.envier,
            "item": ground.items[self.item],
            "rival": self.rival,
            "residual": str(self.residual),
            "reference": str(self.reference),
            "ratio": str(self.ratio),
        }


def allocation_count(n: int, m: int) -> int:
    return n ** m


def _check_size(n: int, m: int):
    if n < 1:
        raise ValueError("need at least one agent")
    if n ** m > MAX_ALLOCATIONS:
        raise SizeLimitError(f"{n}^{m} allocations exceed the limit of {MAX_ALLOCATIONS}")


def enumerate_allocations(n: int, ground: GroundSet | int) -> Iterator[Allocation]:
    m = ground if isinstance(ground, int) else ground.m
    _check_size(n, m)
    for word in itertools.product(range(n), repeat=m):
        yield Allocation(word, n)


def _word_masks(word: Sequence[int], n: int) -> list[int]:
    masks = [0] * n
    for k, a in enumerate(word):
        masks[a] |= 1 << k
    return masks


def _critical(tables, masks) -> tuple[ExtendedValue, Optional[tuple[int, int, int]]]:
    """Critical ratio and the first (i, e, j) attaining it (None when it is the floor of 1)."""
    n = len(masks)
    best: ExtendedValue = ONE
    arg = None
    for i in range(n):
        Xi = masks[i]
        if not Xi or n == 1:
            continue
        t = tables[i]
        e_best, r_best = -1, None
        for e in iter_bits(Xi):
            r = t[Xi ^ (1 << e)]
            if r_best is None or r > r_best:
                e_best, r_best = e, r
        j_best, v_best = -1, None
        for j in range(n):
            if j == i:
                continue
            v = t[masks[j]]
            if v_best is None or v < v_best:
                j_best, v_best = j, v
        ratio = ev_ratio(r_best, v_best)
        if ratio > best:
            best, arg = ratio, (i, e_best, j_best)
    return best, arg


def _witness(tables, masks, i, e, j) -> ViolationWitness:
    residual = tables[i][masks[i] ^ (1 << e)]
    reference = tables[i][masks[j]]
    return ViolationWitness(i, e, j, residual, reference, ev_ratio(residual, reference))


def _require_chores(profile: Profile):
    if profile.polarity != "chores":
        raise ValueError("this operation is defined for chores profiles")


def _masks_of(profile: Profile, X: Allocation) -> list[int]:
    if X.n != profile.n or len(X.assignment) != profile.m:
        raise ValueError("allocation does not match the profile's agents and items")
    return X.bundles


def critical_alpha_chores(profile: Profile, X: Allocation) -> ExtendedValue:
    _require_chores(profile)
    return _critical(profile.tables(), _masks_of(profile, X))[0]


def critical_witness(profile: Profile, X: Allocation) -> Optional[ViolationWitness]:
    """Witness attaining the critical ratio, or None when the ratio is the floor value 1."""
    _require_chores(profile)
    tables = profile.tables()
    masks = _masks_of(profile, X)
    _, arg = _critical(tables, masks)
    return None if arg is None else _witness(tables, masks, *arg)


def _first_chores_violation(tables, masks, alpha: ExactValue) -> Optional[tuple[int, int, int]]:
    n = len(masks)
    for i in range(n):
        t = tables[i]
        for e in iter_bits(masks[i]):
            r = t[masks[i] ^ (1 << e)]
            for j in range(n):
                if j != i and r > alpha * t[masks[j]]:
                    return i, e, j
    return None


def is_alpha_efx(profile: Profile, X: Allocation, alpha) -> Optional[ViolationWitness]:
    """Return None if ``X`` is alpha-EFX, else the first violating (i, item, j)."""
    alpha = ev(alpha)
    tables = profile.tables()
    masks = _masks_of(profile, X)
    if profile.polarity == "chores":
        if alpha < 1:
            raise ValueError(f"chores need alpha >= 1, got {alpha}")
        hit = _first_chores_violation(tables, masks, alpha)
        return None if hit is None else _witness(tables, masks, *hit)
    if alpha.is_zero or alpha > 1:
        raise ValueError(f"goods need 0 < alpha <= 1, got {alpha}")
    n = len(masks)
    for i in range(n):
        t = tables[i]
        own = t[masks[i]]
        for j in range(n):
            if j == i:
                continue
            for g in iter_bits(masks[j]):
                reduced = t[masks[j] ^ (1 << g)]
                if own < alpha * reduced:
                    return ViolationWitness(i, g, j, reduced, own, ev_ratio(reduced, own))
    return None


# ---------------------------------------------------------------------------
# sweeps

def default_workers() -> int:
    env = os.environ.get("EFX_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _decode(index: int, n: int, m: int) -> list[int]:
    word = [0] * m
    for k in range(m - 1, -1, -1):
        index, word[k] = divmod(index, n)
    return word


def _words(n: int, m: int, start: int, stop: int):
    if start >= stop:
        return
    word = _decode(start, n, m)
    for _ in range(stop - start):
        yield word
        k = m - 1
        while k >= 0:
            word[k] += 1
            if word[k] < n:
                break
            word[k] = 0
            k -= 1


def _threshold_chunk(tables, n, m, start, stop, keep_table):
    best, best_index, rows = None, None, [] if keep_table else None
    for offset, word in enumerate(_words(n, m, start, stop)):
        crit, _ = _critical(tables, _word_masks(word, n))
        if best is None or crit < best:
            best, best_index = crit, start + offset
        if keep_table:
            rows.append(crit)
    return best, best_index, rows


def _certificate_chunk(tables, n, m, start, stop):
    witnesses, efx_index = [], None
    for offset, word in enumerate(_words(n, m, start, stop)):
        masks = _word_masks(word, n)
        hit = _first_chores_violation(tables, masks, ONE)
        if hit is None:
            efx_index = start + offset
            witnesses.append(None)
        else:
            witnesses.append(hit)
    return witnesses, efx_index


def _chunks(total: int, workers: int):
    if workers <= 1:
        return [(0, total)]
    size = max(1, -(-total // (workers * 4)))
    return [(s, min(total, s + size)) for s in range(0, total, size)]


def _run(fn, args_list, workers):
    if workers <= 1 or len(args_list) == 1:
        return [fn(*args) for args in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args) for args in args_list]
        return [f.result() for f in futures]


@dataclass
class ThresholdReport:
    alpha_star: ExtendedValue
    argmin: Allocation
    witness: Optional[ViolationWitness]
    allocations: int
    elapsed: float
    table: Optional[list[tuple[Allocation, ExtendedValue]]] = None

    @property
    def finite(self) -> bool:
        return isinstance(self.alpha_star, ExactValue)

    def certifies(self, bound: ExactValue) -> bool:
        """True when no alpha-EFX allocation exists for any alpha < bound."""
        return self.alpha_star >= bound


def instance_threshold(profile: Profile, workers: int = 1, table: bool = False) -> ThresholdReport:
    """Exact minimum of the critical ratio over all ``n^m`` allocations."""
    _require_chores(profile)
    n, m = profile.n, profile.m
    _check_size(n, m)
    started = time.perf_counter()
    tables = profile.tables()
    total = n ** m
    chunks = _chunks(total, workers)
    results = _run(_threshold_chunk, [(tables, n, m, s, e, table) for s, e in chunks], workers)
    best, best_index, rows = None, None, []
    for crit, index, chunk_rows in results:
        # chunks arrive in order, so strict < keeps the first minimizer
        if crit is not None and (best is None or crit < best):
            best, best_index = crit, index
        if table:
            rows.extend(chunk_rows)
    argmin = Allocation(tuple(_decode(best_index, n, m)), n)
    witness = critical_witness(profile, argmin)
    full = None
    if table:
        full = [(Allocation(tuple(_decode(k, n, m)), n), crit) for k, crit in enumerate(rows)]
    return ThresholdReport(best, argmin, witness, total, time.perf_counter() - started, full)


@dataclass
class NoEFXResult:
    """``holds`` is True iff every allocation violates exact EFX.

    ``certificate`` maps each violating allocation to its first violating
    triple; ``efx_allocation`` is the first EFX allocation when one exists.
    """

    holds: bool
    certificate: dict[Allocation, ViolationWitness] = field(default_factory=dict)
    efx_allocation: Optional[Allocation] = None

    def __bool__(self):
        return self.holds


def check_no_efx(profile: Profile, workers: int = 1) -> NoEFXResult:
    _require_chores(profile)
    n, m = profile.n, profile.m
    _check_size(n, m)
    tables = profile.tables()
    chunks = _chunks(n ** m, workers)
    results = _run(_certificate_chunk, [(tables, n, m, s, e) for s, e in chunks], workers)
    certificate: dict[Allocation, ViolationWitness] = {}
    efx_allocation = None
    index = 0
    for hits, _ in results:
        for hit in hits:
            X = Allocation(tuple(_decode(index, n, m)), n)
            if hit is None:
                if efx_allocation is None:
                    efx_allocation = X
            else:
                certificate[X] = _witness(tables, X.bundles, *hit)
            index += 1
    return NoEFXResult(efx_allocation is None, certificate, efx_allocation)
