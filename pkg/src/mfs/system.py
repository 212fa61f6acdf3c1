"""Conformal iterated function systems on the unit interval.

Two kinds of family are supported:

* self-similar families, where every map is affine, ``phi_e(x) = r_e x + o_e``
  (Lüroth, generalized Lüroth, power law, log-power, explicit finite lists);
* Möbius families ``phi_e(x) = 1 / (x + d_e)`` (the Gauss system with
  ``d_e = e`` and a perturbed Gauss system with ``d_e = e + 1/e**2``).

Systems are immutable; an alphabet is either the family's full index set
``{1, 2, ...}`` or a truncation ``{1, ..., n}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .enclosure import Enclosure, down, up

SELF_SIMILAR = ("lueroth", "glueroth", "powerlaw", "logpower", "finite")
MOEBIUS = ("gauss", "pgauss")
FAMILIES = SELF_SIMILAR + MOEBIUS


@dataclass(frozen=True)
class SystemSpec:
    """A conformal IFS on ``[0, 1]``.

    Parameters
    ----------
    family : str
        One of ``FAMILIES``.
    params : tuple of float
        ``(a, p)`` for ``powerlaw``, ``(a,)`` for ``logpower``, empty otherwise.
    ratios, offsets : tuple of float, optional
        Contraction ratios and translations of an explicit finite system.
    alphabet : int or None
        ``None`` for the full alphabet, ``n`` for the truncation to ``{1..n}``.
    """

    family: str
    params: tuple = ()
    ratios: tuple | None = None
    offsets: tuple | None = None
    alphabet: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "finite":
            if self.ratios is None or len(self.ratios) < 2:
                raise ValueError("a finite system needs at least two ratios")
            if any(not 0.0 < r < 1.0 for r in self.ratios):
                raise ValueError("contraction ratios must lie in (0, 1)")
            if self.offsets is not None:
                if len(self.offsets) != len(self.ratios):
                    raise ValueError("offsets and ratios differ in length")
                _check_open_set_condition(self.ratios, self.offsets)
            elif math.fsum(self.ratios) > 1.0:
                raise ValueError("ratios sum above 1: no non-overlapping placement in [0, 1]")
            if self.alphabet is None:
                object.__setattr__(self, "alphabet", len(self.ratios))
        elif self.family == "powerlaw":
            a, p = self.params
            if not (p > 1.0 and 0.0 < a < 1.0):
                raise ValueError("powerlaw needs p > 1 and 0 < a < 1")
        elif self.family == "logpower":
            (a,) = self.params
            if not 0.0 < a < 3.0 * math.log(3.0) ** 2:
                raise ValueError("logpower needs r_1 = a / (3 log(3)^2) < 1")
        if self.alphabet is not None and self.alphabet < 2:
            raise ValueError("an alphabet needs at least two symbols")

    # -- alphabet -------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.alphabet is not None

    @property
    def size(self) -> int | None:
        return self.alphabet

    @property
    def is_self_similar(self) -> bool:
        return self.family in SELF_SIMILAR

    @property
    def is_moebius(self) -> bool:
        return self.family in MOEBIUS

    def symbols(self) -> np.ndarray:
        if not self.is_finite:
            raise ValueError("infinite alphabet has no finite symbol list")
        return np.arange(1, self.alphabet + 1)

    def contains(self, e: int) -> bool:
        return e >= 1 and (self.alphabet is None or e <= self.alphabet)

    def check_word(self, w: Sequence[int]) -> tuple[int, ...]:
        w = tuple(int(e) for e in w)
        if not w:
            raise ValueError("words have length at least 1")
        for e in w:
            if not self.contains(e):
                raise ValueError(f"symbol {e} is outside the alphabet of {self.label}")
        return w

    @property
    def label(self) -> str:
        base = self.family
        if self.family == "powerlaw":
            base += ":a={:g},p={:g}".format(*self.params)
        elif self.family == "logpower":
            base += ":a={:g}".format(*self.params)
        elif self.family == "finite":
            base += ":ratios=" + ",".join(f"{r:g}" for r in self.ratios)
        if self.alphabet is not None and self.family != "finite":
            base += f":trunc={self.alphabet}"
        elif self.family == "finite" and self.alphabet < len(self.ratios):
            base += f":trunc={self.alphabet}"
        return base

    # -- per-symbol data --------------------------------------------------
    def log_ratio(self, e) -> np.ndarray:
        """``log r_e`` for self-similar families (vectorized over ``e``)."""
        e = np.asarray(e, dtype=float)
        f = self.family
        if f == "lueroth":
            return -(np.log(e) + np.log1p(e))
        if f == "glueroth":
            return math.log(4.0) - (np.log(e) + np.log1p(e) + np.log(e + 2.0))
        if f == "powerlaw":
            a, p = self.params
            return math.log(a) - p * np.log(e)
        if f == "logpower":
            (a,) = self.params
            return math.log(a) - np.log(e + 2.0) - 2.0 * np.log(np.log(e + 2.0))
        if f == "finite":
            r = np.log(np.asarray(self.ratios, dtype=float))
            return r[e.astype(int) - 1]
        raise ValueError(f"{f} is not self-similar")

    def log_ratio_law(self, x, lx):
        """``log r_x`` of the family law at real ``x`` with ``lx = log x``.

        Written in terms of ``lx`` so that it stays finite for ``x = inf``.
        """
        f = self.family
        if f == "lueroth":
            return -(2.0 * lx + np.log1p(1.0 / x))
        if f == "glueroth":
            return math.log(4.0) - (3.0 * lx + np.log1p(1.0 / x) + np.log1p(2.0 / x))
        if f == "powerlaw":
            a, p = self.params
            return math.log(a) - p * lx
        if f == "logpower":
            (a,) = self.params
            big = lx + np.log1p(2.0 / x)
            return math.log(a) - big - 2.0 * np.log(big)
        raise ValueError(f"{f} has no infinite ratio law")

    def dlog_ratio_law(self, x):
        x = np.asarray(x, dtype=float)
        f = self.family
        if f == "lueroth":
            return -(1.0 / x + 1.0 / (x + 1.0))
        if f == "glueroth":
            return -(1.0 / x + 1.0 / (x + 1.0) + 1.0 / (x + 2.0))
        if f == "powerlaw":
            return -self.params[1] / x
        if f == "logpower":
            return -(1.0 + 2.0 / np.log(x + 2.0)) / (x + 2.0)
        raise ValueError(f"{f} has no infinite ratio law")

    def d2log_ratio_law(self, x):
        x = np.asarray(x, dtype=float)
        f = self.family
        if f == "lueroth":
            return (1.0 / x) ** 2 + (1.0 / (x + 1.0)) ** 2
        if f == "glueroth":
            return (1.0 / x) ** 2 + (1.0 / (x + 1.0)) ** 2 + (1.0 / (x + 2.0)) ** 2
        if f == "powerlaw":
            return self.params[1] * (1.0 / x) ** 2
        if f == "logpower":
            lg = np.log(x + 2.0)
            return (1.0 + 2.0 * (lg + 1.0) / lg ** 2) * (1.0 / (x + 2.0)) ** 2
        raise ValueError(f"{f} has no infinite ratio law")

    def ratio_growth(self) -> tuple[float, float]:
        """``(k, m)`` with ``log r_x = -k log x - m log log x + O(1)``."""
        f = self.family
        if f in ("lueroth", "gauss", "pgauss"):
            return 2.0, 0.0
        if f == "glueroth":
            return 3.0, 0.0
        if f == "powerlaw":
            return self.params[1], 0.0
        if f == "logpower":
            return 1.0, 2.0
        raise ValueError(f"{f} has no infinite ratio law")

    def log_shift_law(self, x, lx, y: float):
        """``log(d_x + y)`` for Möbius families, finite at ``x = inf``."""
        if self.family == "gauss":
            return lx + np.log1p(y / x)
        if self.family == "pgauss":
            return lx + np.log1p((y + (1.0 / x) ** 2) / x)
        raise ValueError(f"{self.family} is not a Möbius family")

    def dlog_shift_law(self, x, y: float):
        x = np.asarray(x, dtype=float)
        if self.family == "gauss":
            return 1.0 / (x + y)
        if self.family == "pgauss":
            return (1.0 - 2.0 * (1.0 / x) ** 3) / (x + 1.0 / (x * x) + y)
        raise ValueError(f"{self.family} is not a Möbius family")

    def d2log_shift_law(self, x, y: float):
        x = np.asarray(x, dtype=float)
        if self.family == "gauss":
            return -((1.0 / (x + y)) ** 2)
        if self.family == "pgauss":
            big = x + 1.0 / (x * x) + y
            d1 = (1.0 - 2.0 * (1.0 / x) ** 3) / big
            return 6.0 * (1.0 / x) ** 4 / big - d1 ** 2
        raise ValueError(f"{self.family} is not a Möbius family")

    def exact_ratio(self, e: int) -> Fraction | None:
        """The ratio as an exact rational when the family law is rational."""
        if self.family == "lueroth":
            return Fraction(1, e * (e + 1))
        if self.family == "glueroth":
            return Fraction(4, e * (e + 1) * (e + 2))
        return None

    def shift(self, e):
        """``d_e`` in ``phi_e(x) = 1/(x + d_e)`` (vectorized, float)."""
        e = np.asarray(e, dtype=float)
        if self.family == "gauss":
            return e
        if self.family == "pgauss":
            return e + 1.0 / (e * e)
        raise ValueError(f"{self.family} is not a Möbius family")

    def exact_shift(self, e: int):
        if self.family == "gauss":
            return e
        if self.family == "pgauss":
            return Fraction(e) + Fraction(1, e * e)
        raise ValueError(f"{self.family} is not a Möbius family")

    def sup_derivative(self, e) -> np.ndarray:
        """``sup_x |phi_e'(x)|`` over ``[0, 1]`` (vectorized)."""
        if self.is_moebius:
            return 1.0 / self.shift(e) ** 2
        return np.exp(self.log_ratio(e))

    def offset(self, e: int) -> Fraction | float:
        if self.family == "lueroth":
            return Fraction(1, e + 1)
        if self.family == "glueroth":
            return Fraction(2, (e + 1) * (e + 2))
        if self.family == "finite" and self.offsets is not None:
            return self.offsets[e - 1]
        raise ValueError(f"{self.label} has no canonical offsets")

    def has_maps(self) -> bool:
        """Whether the maps themselves (not only their derivatives) are known."""
        return (self.family in ("gauss", "pgauss", "lueroth", "glueroth")
                or (self.family == "finite" and self.offsets is not None))

    def phi(self, e: int, x):
        """Evaluate ``phi_e`` on floats (vectorized over ``x``)."""
        x = np.asarray(x, dtype=float)
        if self.is_moebius:
            return 1.0 / (x + float(self.exact_shift(e)))
        return math.exp(float(self.log_ratio(e))) * x + float(self.offset(e))

    def dphi(self, e: int, x):
        """Evaluate ``|phi_e'|`` on floats (vectorized over ``x``)."""
        x = np.asarray(x, dtype=float)
        if self.is_moebius:
            return 1.0 / (x + float(self.exact_shift(e))) ** 2
        return np.full_like(x, math.exp(float(self.log_ratio(e))))


def _check_open_set_condition(ratios, offsets):
    spans = sorted((o, o + r) for r, o in zip(ratios, offsets))
    for lo, hi in spans:
        if lo < 0.0 or hi > 1.0:
            raise ValueError("images must lie inside [0, 1]")
    for (_, hi0), (lo1, _) in zip(spans, spans[1:]):
        if lo1 < hi0:
            raise ValueError("images overlap: open set condition fails")


# -- constructors ---------------------------------------------------------
def gauss(n: int | None = None) -> SystemSpec:
    return SystemSpec("gauss", alphabet=n)


def perturbed_gauss(n: int | None = None) -> SystemSpec:
    return SystemSpec("pgauss", alphabet=n)


def lueroth(n: int | None = None) -> SystemSpec:
    return SystemSpec("lueroth", alphabet=n)


def generalized_lueroth(n: int | None = None) -> SystemSpec:
    return SystemSpec("glueroth", alphabet=n)


def power_law(a: float, p: float, n: int | None = None) -> SystemSpec:
    return SystemSpec("powerlaw", params=(float(a), float(p)), alphabet=n)


def log_power(a: float, n: int | None = None) -> SystemSpec:
    return SystemSpec("logpower", params=(float(a),), alphabet=n)


def finite(ratios: Sequence[float], offsets: Sequence[float] | None = None) -> SystemSpec:
    return SystemSpec("finite", ratios=tuple(float(r) for r in ratios),
                      offsets=None if offsets is None else tuple(float(o) for o in offsets))


# -- operations -----------------------------------------------------------
def truncate(sys: SystemSpec, n: int) -> SystemSpec:
    """Restrict ``sys`` to the alphabet ``{1, ..., n}``."""
    n = int(n)
    if n < 2:
        raise ValueError("a truncation must keep at least two symbols")
    if sys.alphabet is not None:
        n = min(n, sys.alphabet)
    return replace(sys, alphabet=n)


@dataclass(frozen=True)
class MoebiusMatrix:
    """``x -> (a x + b) / (c x + d)`` with exact entries."""

    a: int | Fraction
    b: int | Fraction
    c: int | Fraction
    d: int | Fraction

    def __matmul__(self, o: "MoebiusMatrix") -> "MoebiusMatrix":
        return MoebiusMatrix(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                             self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def __call__(self, x):
        x = Fraction(x)
        return (self.a * x + self.b) / (self.c * x + self.d)

    def derivative(self, x):
        """``|d/dx|`` at ``x``; equals ``1/(c x + d)^2`` since ``|det| = 1``."""
        x = Fraction(x)
        return Fraction(1) / (self.c * x + self.d) ** 2


def moebius(sys: SystemSpec, w: Sequence[int]) -> MoebiusMatrix:
    """Matrix of ``phi_w = phi_{w_1} o ... o phi_{w_k}`` for a Möbius family."""
    if not sys.is_moebius:
        raise ValueError(f"{sys.label} is not a Möbius family")
    w = sys.check_word(w)
    m = MoebiusMatrix(1, 0, 0, 1)
    for e in w:
        m = m @ MoebiusMatrix(0, 1, 1, sys.exact_shift(e))
    return m


def _float_enclosure(lo: Fraction, hi: Fraction) -> Enclosure:
    flo, fhi = float(lo), float(hi)
    if Fraction(flo) > lo:
        flo = down(flo)
    if Fraction(fhi) < hi:
        fhi = up(fhi)
    return Enclosure(flo, fhi)


def ratio_bounds(sys: SystemSpec, w: Sequence[int]) -> Enclosure:
    """Enclosure of ``|phi_w'(x)|`` over ``x in [0, 1]``.

    Self-similar families have a constant derivative, returned as a
    degenerate enclosure. For Möbius families the derivative
    ``1/(c x + d)^2`` is monotone, so the bounds sit at ``x = 0`` and ``x = 1``.
    """
    w = sys.check_word(w)
    if sys.is_moebius:
        m = moebius(sys, w)
        return _float_enclosure(m.derivative(1), m.derivative(0))
    exact = [sys.exact_ratio(e) for e in w]
    if all(r is not None for r in exact):
        value = float(math.prod(exact))
    else:
        value = math.exp(math.fsum(float(sys.log_ratio(e)) for e in w))
    return Enclosure(value, value)


class SPhi(NamedTuple):
    value: float
    degenerate: bool


def s_phi(sys: SystemSpec) -> SPhi:
    """Largest single-symbol contraction ``sup_e sup_x |phi_e'(x)|``.

    ``degenerate`` is set when the supremum reaches 1, as for the Gauss
    system at ``e = 1, x = 0``.
    """
    if sys.family == "finite":
        value = max(sys.ratios[: sys.alphabet])
    else:
        # every built-in law is decreasing in e, so e = 1 attains the sup
        value = float(sys.sup_derivative(1))
    return SPhi(value, value >= 1.0)


def cylinder_interval(sys: SystemSpec, w: Sequence[int]) -> Enclosure:
    """The image ``phi_w([0, 1])``."""
    w = sys.check_word(w)
    if sys.is_moebius:
        m = moebius(sys, w)
        a, b = m(0), m(1)
        return _float_enclosure(min(a, b), max(a, b))
    if not sys.has_maps():
        raise ValueError(f"{sys.label} has no offsets; cylinder intervals are undefined")
    # phi_w(x) = slope * x + intercept, composed right to left
    slope, intercept = Fraction(1), Fraction(0)
    for e in reversed(w):
        r = sys.exact_ratio(e)
        r = Fraction(r) if r is not None else Fraction(math.exp(float(sys.log_ratio(e))))
        o = Fraction(sys.offset(e))
        slope, intercept = r * slope, r * intercept + o
    return _float_enclosure(intercept, intercept + slope)


def distortion_constant(sys: SystemSpec) -> float:
    """Bounded distortion constant ``K`` with ``sup |phi_w'| <= K inf |phi_w'|``.

    For ``phi_w(x) = (a x + b)/(c x + d)`` with ``0 <= c <= d`` the ratio of
    the derivative at 0 and 1 is ``((c + d)/d)^2 <= ((d_1 + 1)/d_1)^2``.
    """
    if sys.is_self_similar:
        return 1.0
    d1 = float(sys.exact_shift(1))
    return ((d1 + 1.0) / d1) ** 2
