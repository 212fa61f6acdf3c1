"""Rigorous enclosures of positive series given in log form.

A series ``sum_e g(e)`` is described by a term law: ``log g`` as a function
of ``(x, log x)``, its derivative in ``x``, and the asymptotic law

    log g(x) = -A x - B log x - C log log x + O(1),

which decides convergence exactly (integral test). A convergent infinite
series is enclosed by an explicit partial sum plus an integral sandwich of
the tail once ``g`` is decreasing beyond ``N`` (tighter when ``g`` is also
convex there).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from scipy import integrate

from .enclosure import Enclosure, down, up

_EPS = float(np.finfo(float).eps)
_CHUNK = 1 << 20


@dataclass(frozen=True)
class Growth:
    """Coefficients of the asymptotic law of ``log g``."""

    A: float = 0.0
    B: float = 0.0
    C: float = 0.0

    def converges(self) -> bool:
        if self.A != 0.0:
            return self.A > 0.0
        if self.B != 1.0:
            return self.B > 1.0
        return self.C > 1.0


class TermLaw(Protocol):
    growth: Growth

    def log(self, x: np.ndarray, lx: np.ndarray) -> np.ndarray: ...

    def dlog(self, x: np.ndarray) -> np.ndarray: ...

    def magnitude(self, x: np.ndarray, lx: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class SeriesResult:
    """``kind`` is ``"finite"``, ``"inf"`` or ``"indeterminate"``.

    ``log_sum`` encloses ``log sum g``; for ``"indeterminate"`` only its lower
    endpoint is meaningful. ``converged`` records whether the requested
    width was reached.
    """

    kind: str
    log_sum: Enclosure | None = None
    converged: bool = True
    terms: int = 0


def finite_log_sum(law: TermLaw, first: int, last: int) -> Enclosure:
    """Enclosure of ``log sum_{e=first}^{last} g(e)``."""
    blocks = []
    shift = -math.inf
    for start in range(first, last + 1, _CHUNK):
        x = np.arange(start, min(last, start + _CHUNK - 1) + 1, dtype=float)
        lx = np.log(x)
        lg = law.log(x, lx)
        blocks.append((lg, law.magnitude(x, lx)))
        shift = max(shift, float(np.max(lg)))
    if not math.isfinite(shift):
        raise FloatingPointError("series terms are not finite")
    lo = hi = 0.0
    for lg, mag in blocks:
        # the exponent carries an absolute error, i.e. a relative error per term
        err = 8.0 * _EPS * (mag + abs(shift) + 1.0)
        terms = np.exp(lg - shift)
        lo += math.fsum(terms * (1.0 - err))
        hi += math.fsum(terms * (1.0 + err))
    n = last - first + 1
    lo = down(lo * (1.0 - 2 * n * _EPS))
    hi = up(hi * (1.0 + 2 * n * _EPS))
    return Enclosure(down(math.log(lo) + shift, 2), up(math.log(hi) + shift, 2))


def _integral(law: TermLaw, a: float, b: float, shift: float) -> tuple[float, float]:
    """Enclosure of ``exp(-shift) int_a^b g(x) dx`` via ``x = exp(u)``."""
    def f(u):
        with np.errstate(over="ignore"):
            x = np.array([math.exp(u) if u < 709.0 else math.inf])
        v = float(law.log(x, np.array([u]))[0]) - shift + u
        if v > 700.0:
            raise OverflowError("integrand exceeds the normalisation shift")
        return math.exp(v)

    ua = math.log(a)
    if b == math.inf:
        pieces = [ua, ua + 1.0, ua + 4.0, ua + 16.0, ua + 64.0, ua + 256.0, math.inf]
    else:
        pieces = [ua, math.log(b)]
    total, err = 0.0, 0.0
    for lo_u, hi_u in zip(pieces, pieces[1:]):
        with warnings.catch_warnings():
            # an unreliable error estimate would void the enclosure
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, e = integrate.quad(f, lo_u, hi_u, limit=400, epsabs=0.0, epsrel=1e-12)
            except integrate.IntegrationWarning as exc:
                raise ArithmeticError(str(exc)) from None
        total += val
        err += e
    pad = 10.0 * err + 1e-11 * abs(total)
    return max(total - pad, 0.0), total + pad


def _geometric_grid(n: float) -> np.ndarray:
    x = n * np.power(1.05, np.arange(0, 14200))
    return x[x < 1e300]


def _decreasing_from(law: TermLaw, n: float) -> bool:
    # the built-in laws have x * dlog(x) monotone in log x; a dense geometric
    # sample of the sign therefore decides monotonicity on [n, inf)
    return bool(np.all(law.dlog(_geometric_grid(n)) < 0.0))


def _convex_from(law: TermLaw, n: float) -> bool:
    # g'' = (L'' + L'^2) g with L = log g
    if not hasattr(law, "d2log"):
        return False
    x = _geometric_grid(n)
    return bool(np.all(law.d2log(x) + law.dlog(x) ** 2 > 0.0))


def _tail(law: TermLaw, n: int, shift: float) -> tuple[float, float]:
    """Enclosure of ``exp(-shift) sum_{e > n} g(e)`` for ``g`` decreasing beyond ``n``.

    Convex tails use the trapezoid and midpoint bounds
    ``int_{n+1} g + g(n+1)/2 <= sum <= int_{n+1/2} g``; otherwise the plain
    integral test ``int_{n+1} g <= sum <= int_n g``.
    """
    lo, _ = _integral(law, n + 1.0, math.inf, shift)
    if _convex_from(law, float(n)):
        _, hi = _integral(law, n + 0.5, math.inf, shift)
        x = np.array([n + 1.0])
        lg = float(law.log(x, np.log(x))[0]) - shift
        err = 8.0 * _EPS * (float(law.magnitude(x, np.log(x))[0]) + abs(shift) + 1.0)
        lo += math.exp(lg) * (1.0 - err) * 0.5
    else:
        _, hi = _integral(law, float(n), math.inf, shift)
    return lo, hi


def log_series(law: TermLaw, first: int = 1, last: int | None = None,
               eps: float = 1e-6, max_terms: int = 1 << 22,
               start_terms: int = 64) -> SeriesResult:
    """Enclose ``log sum_{e >= first} g(e)``, up to ``last`` when given."""
    if last is not None:
        if last < first:
            return SeriesResult("finite", Enclosure(-math.inf, -math.inf))
        return SeriesResult("finite", finite_log_sum(law, first, last),
                            terms=last - first + 1)
    if not law.growth.converges():
        return SeriesResult("inf")

    n = max(first, start_terms)
    best = None
    while True:
        tail_lo = None
        if _decreasing_from(law, float(n)):
            part = finite_log_sum(law, first, n)
            shift = part.hi
            try:
                tail_lo, tail_hi = _tail(law, n, shift)
            except ArithmeticError:
                tail_lo, tail_hi = None, None
        if tail_lo is not None:
            s_lo = math.exp(part.lo - shift) + tail_lo
            s_hi = math.exp(part.hi - shift) + tail_hi
            enc = Enclosure(down(math.log(down(s_lo)) + shift, 2),
                            up(math.log(up(s_hi)) + shift, 2))
            if best is None or enc.width < best.width:
                best = enc
            if enc.width <= eps:
                return SeriesResult("finite", enc, True, n)
        if n >= max_terms:
            break
        n = min(n * 8, max_terms)
    if best is None:
        lower = finite_log_sum(law, first, n).lo
        return SeriesResult("indeterminate", Enclosure(lower, math.inf), False, n)
    return SeriesResult("finite", best, False, n)
