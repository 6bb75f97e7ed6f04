"""Exact rational arithmetic extended with a single unsigned infinity.

Values are fractions p/q in lowest terms with q >= 0.  Infinity is stored
exactly as 1/0 and is its own negation, so the arithmetic needed here
(addition, negation, reciprocal) is total: x + inf = inf, 1/inf = 0,
1/0 = inf.
"""

from __future__ import annotations

from math import gcd

from .errors import IndeterminateFormError


class ExtendedRational:
    """Immutable fraction p/q in lowest terms, q >= 0, with 1/0 = infinity."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: int, denominator: int = 1):
        if denominator == 0:
            if numerator == 0:
                raise IndeterminateFormError("0/0 has no extended-rational value")
            numerator = 1
        elif denominator < 0:
            numerator, denominator = -numerator, -denominator
        g = gcd(abs(numerator), denominator)
        if g > 1:
            numerator //= g
            denominator //= g
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)

    def __setattr__(self, name, value):
        raise AttributeError("ExtendedRational is immutable")

    @property
    def is_infinite(self) -> bool:
        return self.denominator == 0

    def __add__(self, other: "ExtendedRational | int") -> "ExtendedRational":
        other = _coerce(other)
        if self.is_infinite or other.is_infinite:
            return INFINITY
        return ExtendedRational(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    __radd__ = __add__

    def __sub__(self, other: "ExtendedRational | int") -> "ExtendedRational":
        return self + (-_coerce(other))

    def __neg__(self) -> "ExtendedRational":
        if self.is_infinite:
            return INFINITY
        return ExtendedRational(-self.numerator, self.denominator)

    def reciprocal(self) -> "ExtendedRational":
        return ExtendedRational(self.denominator, self.numerator)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = ExtendedRational(other)
        if not isinstance(other, ExtendedRational):
            return NotImplemented
        return (self.numerator, self.denominator) == (other.numerator, other.denominator)

    def __hash__(self):
        return hash((self.numerator, self.denominator))

    def __lt__(self, other: "ExtendedRational | int") -> bool:
        other = _coerce(other)
        if self.is_infinite or other.is_infinite:
            # Unsigned infinity compares greater than every finite value.
            return other.is_infinite and not self.is_infinite
        return self.numerator * other.denominator < other.numerator * self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"

    def __repr__(self) -> str:
        return f"ExtendedRational({self.numerator}, {self.denominator})"


def _coerce(x: "ExtendedRational | int") -> ExtendedRational:
    return x if isinstance(x, ExtendedRational) else ExtendedRational(x)


INFINITY = ExtendedRational(1, 0)
ZERO = ExtendedRational(0, 1)
