"""Closed real intervals with outward rounding.

Every arithmetic result is widened by one unit in the last place in the
outward direction, so an enclosure computed from enclosures still contains
the exact value despite round-to-nearest floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_INF = math.inf


def down(x: float, ulps: int = 1) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, -_INF)
    return x


def up(x: float, ulps: int = 1) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, _INF)
    return x


@dataclass(frozen=True)
class Enclosure:
    """A closed interval ``[lo, hi]``; ``lo == hi`` is allowed."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("enclosure endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: float) -> "Enclosure":
        return cls(float(x), float(x))

    @classmethod
    def around(cls, x: float, ulps: int = 1) -> "Enclosure":
        """Enclosure of a value computed with a few rounding errors."""
        return cls(down(x, ulps), up(x, ulps))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def intersects(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def subset_of(self, other: "Enclosure") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def hull(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(min(self.lo, other.lo), max(self.hi, other.hi))

    def __add__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(down(self.lo + other.lo), up(self.hi + other.hi))
        v = float(other)
        return Enclosure(down(self.lo + v), up(self.hi + v))

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Enclosure) else -float(other))

    def scale(self, c: float) -> "Enclosure":
        c = float(c)
        a, b = self.lo * c, self.hi * c
        if a > b:
            a, b = b, a
        return Enclosure(down(a), up(b))

    def log(self) -> "Enclosure":
        # libm log is faithful to within 1 ulp
        lo = -_INF if self.lo <= 0 else down(math.log(self.lo), 2)
        return Enclosure(lo, up(math.log(self.hi), 2))

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __repr__(self):
        return f"Enclosure({self.lo!r}, {self.hi!r})"
