"""Exact non-negative rationals and their extension with infinity.

Plain values are ``fractions.Fraction`` instances (always in lowest terms
with positive denominator); this module adds validation and parsing helpers
plus ``XReal``, the completion of the non-negative rationals with a top
element ``inf``.  ``XReal`` arithmetic follows the complete-lattice
conventions: addition with ``inf`` yields ``inf``, ``inf`` times a positive
value is ``inf``, and ``0 * inf == 0``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

Rat = Fraction

RatLike = Union[int, Fraction, str]


def rat(value: RatLike, denominator: int | None = None) -> Fraction:
    """Build a validated non-negative rational.

    Accepts an int, a Fraction, or a string ``"p"`` / ``"p/q"``; an optional
    second argument gives a denominator for int inputs.
    """
    if denominator is not None:
        q = Fraction(value, denominator)
    elif isinstance(value, str):
        q = parse_rat(value)
    else:
        q = Fraction(value)
    if q < 0:
        raise ValueError(f"negative rational not allowed: {q}")
    return q


def parse_rat(text: str) -> Fraction:
    """Parse ``"123"`` or ``"7/2"`` into a non-negative rational."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        q = Fraction(int(num), int(den))
    else:
        q = Fraction(int(text))
    if q < 0:
        raise ValueError(f"negative rational not allowed: {text!r}")
    return q


def format_rat(q: Fraction) -> str:
    """Render a rational as ``p`` or ``p/q`` (lowest terms)."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_natural(q: Fraction) -> bool:
    return q.denominator == 1 and q.numerator >= 0


class XReal:
    """A non-negative rational or infinity, with 0·inf = 0.

    Instances are immutable; ``XReal.INF`` is the unique infinite value and
    finite values wrap a Fraction.
    """

    __slots__ = ("_fin",)

    INF: "XReal"

    def __init__(self, finite: Fraction | None):
        object.__setattr__(self, "_fin", finite)

    def __setattr__(self, *_):
        raise AttributeError("XReal is immutable")

    @staticmethod
    def of(value: RatLike) -> "XReal":
        return XReal(rat(value))

    @property
    def is_finite(self) -> bool:
        return self._fin is not None

    @property
    def finite(self) -> Fraction:
        if self._fin is None:
            raise ValueError("infinite value has no finite part")
        return self._fin

    def __add__(self, other: "XReal") -> "XReal":
        if self._fin is None or other._fin is None:
            return XReal.INF
        return XReal(self._fin + other._fin)

    def __mul__(self, other: "XReal") -> "XReal":
        a, b = self._fin, other._fin
        if a is not None and b is not None:
            return XReal(a * b)
        # at least one side infinite: 0 annihilates, anything else gives inf
        if a == 0 or b == 0:
            return XReal(Fraction(0))
        return XReal.INF

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, XReal):
            return NotImplemented
        return self._fin == other._fin

    def __hash__(self) -> int:
        return hash(self._fin)

    def __lt__(self, other: "XReal") -> bool:
        if self._fin is None:
            return False
        if other._fin is None:
            return True
        return self._fin < other._fin

    def __le__(self, other: "XReal") -> bool:
        return self == other or self < other

    def __gt__(self, other: "XReal") -> bool:
        return other < self

    def __ge__(self, other: "XReal") -> bool:
        return other <= self

    def __repr__(self) -> str:
        return f"XReal({self})"

    def __str__(self) -> str:
        if self._fin is None:
            return "inf"
        return format_rat(self._fin)


XReal.INF = XReal(None)

ZERO = XReal(Fraction(0))
ONE = XReal(Fraction(1))


def xsum(values: Iterable[XReal]) -> XReal:
    total = ZERO
    for v in values:
        total = total + v
    return total


def xprod(values: Iterable[XReal]) -> XReal:
    total = ONE
    for v in values:
        total = total * v
        if total == ZERO:
            return ZERO
    return total


def sup(values: Iterable[XReal]) -> XReal:
    """Supremum of a finite set; the supremum of the empty set is 0."""
    best = ZERO
    empty = True
    for v in values:
        empty = False
        if best < v:
            best = v
    return ZERO if empty else best


def inf(values: Iterable[XReal]) -> XReal:
    """Infimum of a finite set; the infimum of the empty set is infinity."""
    best = XReal.INF
    for v in values:
        if v < best:
            best = v
    return best


def parse_xreal(text: str) -> XReal:
    text = text.strip()
    if text == "inf":
        return XReal.INF
    return XReal.of(parse_rat(text))
