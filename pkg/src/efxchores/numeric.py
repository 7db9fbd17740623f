"""Exact nonnegative numbers of the form ``m * 2^(p/q)``.

Every verdict in the package (monotonicity, subadditivity, EFX ratios,
thresholds) is decided with the types in this module.  Comparisons reduce to
integer arithmetic; no floating point is involved anywhere.

An :class:`ExactValue` is stored canonically: the rational exponent is
reduced into ``[0, 1)`` by moving its integer part into the mantissa.  Since
``2^r`` is irrational for every non-integer rational ``r``, this makes the
representation unique, so ``==`` and ``hash`` are structural.
"""

from __future__ import annotations

import enum
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Iterable, Union

__all__ = [
    "Ordering",
    "ExactValue",
    "PositiveInfinity",
    "INFINITY",
    "ExtendedValue",
    "ZERO",
    "ONE",
    "ev",
    "ev_compare",
    "ev_ratio",
    "ev_mul",
    "ev_pow",
    "compare_sums",
    "parse_value",
    "format_value",
    "decimal_str",
    "integer_root",
]


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _sign(x: int) -> Ordering:
    return Ordering((x > 0) - (x < 0))


def integer_root(x: int, n: int) -> int:
    """Return ``floor(x ** (1/n))`` for integers ``x >= 0``, ``n >= 1``."""
    if x < 0 or n < 1:
        raise ValueError("integer_root needs x >= 0 and n >= 1")
    if x < 2 or n == 1:
        return x
    # Newton iteration from above converges monotonically to the floor.
    r = 1 << -(-x.bit_length() // n)
    while True:
        y = ((n - 1) * r + x // r ** (n - 1)) // n
        if y >= r:
            return r
        r = y


Number = Union[int, Fraction, "ExactValue"]


@total_ordering
class ExactValue:
    """``mantissa * 2**exponent`` with rational mantissa >= 0 and rational exponent."""

    __slots__ = ("_m", "_e")

    def __init__(self, mantissa: int | Fraction | str = 0, exponent: int | Fraction | str = 0):
        m = Fraction(mantissa)
        e = Fraction(exponent)
        if m < 0:
            raise ValueError(f"ExactValue mantissa must be >= 0, got {m}")
        if m == 0:
            e = Fraction(0)
        else:
            whole = e.numerator // e.denominator
            if whole:
                m = m * 2 ** whole if whole > 0 else m / 2 ** -whole
                e -= whole
        self._m = m
        self._e = e

    # pickling with __slots__ and no __dict__
    def __getstate__(self):
        return (self._m, self._e)

    def __setstate__(self, state):
        self._m, self._e = state

    @property
    def mantissa(self) -> Fraction:
        return self._m

    @property
    def exponent(self) -> Fraction:
        """Fractional exponent in ``[0, 1)``."""
        return self._e

    @property
    def is_zero(self) -> bool:
        return self._m == 0

    @property
    def is_rational(self) -> bool:
        return self._e == 0

    def to_fraction(self) -> Fraction:
        if self._e != 0:
            raise ValueError(f"{self} is irrational")
        return self._m

    @classmethod
    def coerce(cls, x: Number) -> "ExactValue":
        if isinstance(x, ExactValue):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        if isinstance(x, str):
            return parse_value(x)
        raise TypeError(f"cannot convert {type(x).__name__} to ExactValue")

    def __eq__(self, other):
        if isinstance(other, ExactValue):
            return self._m == other._m and self._e == other._e
        if isinstance(other, (int, Fraction)):
            return self._e == 0 and self._m == other
        if isinstance(other, PositiveInfinity):
            return False
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, PositiveInfinity):
            return True
        if isinstance(other, (int, Fraction)):
            if other < 0:
                return False
            other = ExactValue(other)
        if not isinstance(other, ExactValue):
            return NotImplemented
        return ev_compare(self, other) is Ordering.LESS

    def __hash__(self):
        if self._e == 0:
            return hash(self._m)
        return hash((self._m, self._e))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExactValue(other)
        if not isinstance(other, ExactValue):
            return NotImplemented
        return ev_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExactValue(other)
        if not isinstance(other, ExactValue):
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division by zero ExactValue")
        return ExactValue(self._m / other._m, self._e - other._e)

    def __pow__(self, k: int):
        return ev_pow(self, k)

    def __bool__(self):
        return self._m != 0

    def __str__(self):
        return format_value(self)

    def __repr__(self):
        return f"ExactValue('{format_value(self)}')"


class PositiveInfinity:
    """Singleton greater than every :class:`ExactValue`."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (PositiveInfinity, ())

    def __eq__(self, other):
        return isinstance(other, PositiveInfinity)

    def __hash__(self):
        return hash("PositiveInfinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, PositiveInfinity)

    def __gt__(self, other):
        return not isinstance(other, PositiveInfinity)

    def __ge__(self, other):
        return True

    def __str__(self):
        return "inf"

    __repr__ = __str__


INFINITY = PositiveInfinity()
ExtendedValue = Union[ExactValue, PositiveInfinity]
ZERO = ExactValue(0)
ONE = ExactValue(1)


def ev(x: Number | str) -> ExactValue:
    """Shorthand constructor accepting ints, Fractions, ExactValues and strings."""
    return ExactValue.coerce(x)


def ev_compare(a: ExactValue, b: ExactValue) -> Ordering:
    """Order two exact values using integer arithmetic only."""
    if a._e == b._e:
        return _sign((a._m > b._m) - (a._m < b._m))
    if a._m == 0 or b._m == 0:
        return _sign((a._m > 0) - (b._m > 0))
    # a*2^x ? b*2^y  <=>  (a/b)^q ? 2^p  with y - x = p/q
    d = b._e - a._e
    p, q = d.numerator, d.denominator
    lhs = (a._m.numerator * b._m.denominator) ** q
    rhs = (a._m.denominator * b._m.numerator) ** q
    if p >= 0:
        rhs <<= p
    else:
        lhs <<= -p
    return _sign((lhs > rhs) - (lhs < rhs))


def ev_ratio(num: ExactValue, den: ExactValue) -> ExtendedValue:
    """``num / den`` with ``x/0 = inf`` for ``x > 0`` and ``0/0 = 1``."""
    if den.is_zero:
        return ONE if num.is_zero else INFINITY
    return num / den


def ev_mul(a: ExactValue, b: ExactValue) -> ExactValue:
    if a.is_zero or b.is_zero:
        return ZERO
    return ExactValue(a._m * b._m, a._e + b._e)


def ev_pow(a: ExactValue, k: int) -> ExactValue:
    if not isinstance(k, int):
        raise TypeError("ev_pow exponent must be an int")
    if k == 0:
        return ONE
    if a.is_zero:
        if k < 0:
            raise ZeroDivisionError("0 ** negative")
        return ZERO
    return ExactValue(a._m ** k, a._e * k)


# ---------------------------------------------------------------------------
# sums of values

def _sign_of_combination(coeffs: dict[int, int], q: int) -> Ordering:
    """Sign of ``sum(c_k * 2^(k/q))`` for integer ``c_k`` and ``0 <= k < q``.

    ``x^q - 2`` is irreducible (Eisenstein), so the powers ``2^(k/q)`` are
    linearly independent over the rationals: the sum is zero iff every
    coefficient is.  A nonzero sum is separated from zero by bracketing each
    power between consecutive dyadic integers and refining until the bracket
    excludes zero.
    """
    coeffs = {k: c for k, c in coeffs.items() if c}
    if not coeffs:
        return Ordering.EQUAL
    if all(c > 0 for c in coeffs.values()):
        return Ordering.GREATER
    if all(c < 0 for c in coeffs.values()):
        return Ordering.LESS
    bits = 64
    while True:
        lo_sum = hi_sum = 0
        for k, c in coeffs.items():
            target = 1 << (k + q * bits)
            r = integer_root(target, q)
            lo, hi = (r, r) if r ** q == target else (r, r + 1)
            if c > 0:
                lo_sum += c * lo
                hi_sum += c * hi
            else:
                lo_sum += c * hi
                hi_sum += c * lo
        if lo_sum > 0:
            return Ordering.GREATER
        if hi_sum < 0:
            return Ordering.LESS
        bits *= 2


@lru_cache(maxsize=1 << 16)
def _compare_sums_cached(lhs: tuple, rhs: tuple) -> Ordering:
    terms = [(v, 1) for v in lhs if v] + [(v, -1) for v in rhs if v]
    if all(v._e == 0 for v, _ in terms):
        total = sum((s * v._m for v, s in terms), Fraction(0))
        return _sign((total > 0) - (total < 0))
    q = 1
    for v, _ in terms:
        d = v._e.denominator
        q = q * d // _gcd(q, d)
    acc: dict[int, Fraction] = {}
    for v, s in terms:
        k = int(v._e * q)
        acc[k] = acc.get(k, Fraction(0)) + s * v._m
    den = 1
    for c in acc.values():
        den = den * c.denominator // _gcd(den, c.denominator)
    return _sign_of_combination({k: int(c * den) for k, c in acc.items()}, q)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _sort_key(v: ExactValue):
    return (v._e, v._m)


def compare_sums(lhs: Iterable[ExactValue], rhs: Iterable[ExactValue]) -> Ordering:
    """Exactly order ``sum(lhs)`` against ``sum(rhs)``.

    Sums of ``m * 2^(p/q)`` values leave the family, so inequalities such as
    ``f(S) + f(T) >= f(S | T)`` are decided here rather than by adding
    :class:`ExactValue` objects.
    """
    return _compare_sums_cached(
        tuple(sorted(lhs, key=_sort_key)), tuple(sorted(rhs, key=_sort_key))
    )


# ---------------------------------------------------------------------------
# text forms

_POWER_RE = re.compile(
    r"^\s*(?:(?P<m>\d+(?:\s*/\s*\d+)?)\s*\*\s*)?2\s*\^\s*"
    r"(?:\(\s*(?P<p1>[+-]?\d+)(?:\s*/\s*(?P<q1>\d+))?\s*\)|(?P<p2>[+-]?\d+))\s*$"
)
_RATIONAL_RE = re.compile(r"^\s*\d+(?:\s*/\s*\d+)?\s*$")


def parse_value(text: str) -> ExactValue:
    """Parse ``"0"``, ``"a/b"``, ``"m*2^(p/q)"``, ``"2^(p/q)"`` or ``"2^p"``."""
    s = text.strip()
    match = _POWER_RE.match(s)
    if match:
        m = Fraction(match["m"].replace(" ", "")) if match["m"] else Fraction(1)
        if match["p1"] is not None:
            q = int(match["q1"]) if match["q1"] else 1
            if q == 0:
                raise ValueError(f"zero exponent denominator in {text!r}")
            e = Fraction(int(match["p1"]), q)
        else:
            e = Fraction(int(match["p2"]))
        return ExactValue(m, e)
    if _RATIONAL_RE.match(s):
        return ExactValue(Fraction(s.replace(" ", "")))
    raise ValueError(f"not an exact value: {text!r}")


def format_value(value: ExtendedValue) -> str:
    """Canonical text form, e.g. ``"1/2*2^(0/1)"``, ``"1*2^(1/3)"``, ``"0"``."""
    if isinstance(value, PositiveInfinity):
        return "inf"
    if value.is_zero:
        return "0"
    e = value.exponent
    return f"{value.mantissa}*2^({e.numerator}/{e.denominator})"


def decimal_str(value: ExtendedValue, digits: int = 12) -> str:
    """Decimal rendering for reports only; never used for verdicts."""
    if isinstance(value, PositiveInfinity):
        return "inf"
    if value.is_zero:
        return "0"
    bits = 4 * digits + 64
    e = value.exponent
    root = integer_root(1 << (e.numerator + e.denominator * bits), e.denominator)
    m = value.mantissa
    with localcontext() as ctx:
        ctx.prec = digits
        approx = Decimal(m.numerator * root) / Decimal(m.denominator << bits)
    return format(approx, "f")
