"""Topological pressure of ``t * zeta + beta * psi``.

Three routes are provided:

``exact_series_pressure``
    Self-similar systems with depth-1 potentials have
    ``Z_n = (sum_e r_e^t exp(beta c_e))^n``, so the pressure is the log of a
    single series, enclosed with an analytic tail.
``partition_bounds``
    Brute-force enumeration of ``Z_n`` over words of length ``n`` with exact
    per-word derivative bounds (Möbius endpoints for Gauss-type systems).
``cylinder_transfer_bounds``
    For Möbius systems, ``Z_N`` is bounded above and below for every ``N``
    by products of two nonnegative matrices indexed by a prefix code of
    cylinders of length at most ``delta``: the matrix entries take the sup
    (resp. inf) of ``|phi_e'|^t`` over the cylinder the next point lies in.
    The pressure lies between the logs of their spectral radii, which are
    themselves enclosed with Collatz-Wielandt ratios.

``pressure`` dispatches between them and intersects whatever is available.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .enclosure import Enclosure, down, up
from .laws import BudgetError, DivergenceError, MoebiusLaw, SelfSimilarLaw
from .potential import WeightedPotential
from .series import SeriesResult, finite_log_sum, log_series
from .transfer import cylinder_transfer_bounds

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class DepthPolicy:
    """Effort knobs for pressure evaluation.

    ``max_depth`` bounds the word length of brute-force partition sums,
    ``symbol_cap`` the number of explicitly summed symbols before an analytic
    tail takes over, and ``target_width`` the requested enclosure width.
    ``max_states`` caps the size of the cylinder graph of Möbius systems.
    """

    max_depth: int = 6
    symbol_cap: int = 4096
    target_width: float = 1e-3
    max_states: int = 120_000
    enum_budget: int = 50_000

    def __post_init__(self):
        if self.max_depth < 1 or self.symbol_cap < 1 or not self.target_width > 0:
            raise ValueError("invalid depth policy")

    def refined(self, factor: float = 8.0) -> "DepthPolicy":
        return DepthPolicy(self.max_depth, self.symbol_cap, self.target_width / factor,
                           self.max_states, self.enum_budget)


@dataclass(frozen=True)
class PressureValue:
    """Finite enclosure, certified ``+inf``, or a lower bound only.

    ``kind`` is ``"finite"``, ``"inf"`` or ``"indeterminate"``. A finite value
    whose width missed the policy target has ``converged = False``.
    """

    kind: str
    lo: float = -math.inf
    hi: float = math.inf
    converged: bool = True
    note: str = ""

    @classmethod
    def finite(cls, enc: Enclosure, converged: bool = True, note: str = "") -> "PressureValue":
        return cls("finite", enc.lo, enc.hi, converged, note)

    @classmethod
    def infinite(cls, note: str = "") -> "PressureValue":
        return cls("inf", math.inf, math.inf, True, note)

    @classmethod
    def indeterminate(cls, lower: float, note: str = "") -> "PressureValue":
        return cls("indeterminate", lower, math.inf, False, note)

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def is_infinite(self) -> bool:
        return self.kind == "inf"

    @property
    def enclosure(self) -> Enclosure:
        return Enclosure(self.lo, self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo if self.is_finite else math.inf

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi) if self.is_finite else math.inf


class Sign(str, enum.Enum):
    NEGATIVE = "negative"
    POSITIVE = "positive"
    STRADDLING = "straddling"


def _from_series(res: SeriesResult, note: str = "") -> PressureValue:
    if res.kind == "inf":
        return PressureValue.infinite(note or "series diverges")
    if res.kind == "indeterminate":
        return PressureValue.indeterminate(res.log_sum.lo, note or "tail not certified")
    return PressureValue.finite(res.log_sum, res.converged, note)


def exact_series_pressure(wp: WeightedPotential, eps: float = 1e-9,
                          max_terms: int = 1 << 22) -> PressureValue:
    """Pressure of a self-similar system as ``log sum_e r_e^t exp(beta c_e)``."""
    sys = wp.system
    if not sys.is_self_similar:
        raise ValueError(f"{sys.label} is not self-similar")
    if not eps > 0:
        raise ValueError("eps must be positive")
    law = SelfSimilarLaw(sys, wp.psi, float(wp.t), float(wp.beta))
    return _from_series(log_series(law, 1, sys.alphabet, eps=eps, max_terms=max_terms))


# -- brute-force partition sums ---------------------------------------------
def _word_log_weights(wp: WeightedPotential, m: int, n: int):
    """Per-word ``log`` sup/inf weights and magnitudes over ``{1..m}^n``."""
    sys, t, beta = wp.system, float(wp.t), float(wp.beta)
    e = np.arange(1, m + 1, dtype=float)
    c = wp.psi.value(e) * beta if beta != 0.0 else np.zeros(m)
    csum = np.zeros(1)
    if sys.is_moebius:
        d_e = sys.shift(e)
        a = np.array([1.0])
        b = np.array([0.0])
        cc = np.array([0.0])
        d = np.array([1.0])
        for _ in range(n):
            # M_u @ [[0, 1], [1, d_e]] = [[b, a + b d_e], [d, c + d d_e]]
            a, b = np.repeat(b, m), (a[:, None] + b[:, None] * d_e[None, :]).ravel()
            cc, d = np.repeat(d, m), (cc[:, None] + d[:, None] * d_e[None, :]).ravel()
            csum = (csum[:, None] + c[None, :]).ravel()
        at0 = -2.0 * np.log(d)          # log |phi_w'(0)|
        at1 = -2.0 * np.log(cc + d)     # log |phi_w'(1)|
        hi_log, lo_log = (at0, at1) if t >= 0 else (at1, at0)
        sup = t * hi_log + csum
        inf = t * lo_log + csum
        mag = abs(t) * np.abs(at1) + np.abs(csum)
        # pgauss entries are rational, so the float matrices carry rounding
        slack = 0.0 if sys.family == "gauss" else 64 * n * _EPS * (1.0 + abs(t))
        return sup + slack, inf - slack, mag
    lr = sys.log_ratio(e)
    lsum = np.zeros(1)
    for _ in range(n):
        lsum = (lsum[:, None] + lr[None, :]).ravel()
        csum = (csum[:, None] + c[None, :]).ravel()
    val = t * lsum + csum
    return val, val, np.abs(t * lsum) + np.abs(csum)


def _lse(lg: np.ndarray, mag: np.ndarray, upper: bool) -> float:
    shift = float(np.max(lg))
    err = 8.0 * _EPS * (mag + abs(shift) + 1.0) + len(lg) * 2 * _EPS
    terms = np.exp(lg - shift)
    if upper:
        return up(math.log(up(math.fsum(terms * (1.0 + err)))) + shift, 2)
    return down(math.log(down(math.fsum(terms * (1.0 - err)))) + shift, 2)


def _symbol_law(wp: WeightedPotential, y: float):
    if wp.system.is_moebius:
        return MoebiusLaw(wp.system, wp.psi, float(wp.t), float(wp.beta), y)
    return SelfSimilarLaw(wp.system, wp.psi, float(wp.t), float(wp.beta))


def partition_bounds(wp: WeightedPotential, n: int, cap: int,
                     budget: int = 2_000_000) -> Enclosure:
    """Enclosure of ``(1/n) log Z_n`` by enumeration over symbols ``<= cap``.

    The upper endpoint uses per-word suprema plus the contribution of words
    holding a symbol ``> cap``, bounded by ``(S + T)^n - S^n`` with ``S``, ``T``
    the single-symbol sup sums below and above the cap. The lower endpoint
    uses per-word infima over the capped alphabet, a valid lower bound for
    the pressure by supermultiplicativity.
    """
    sys = wp.system
    size = sys.alphabet
    m = cap if size is None else min(cap, size)
    if m ** n > budget:
        raise BudgetError(f"{m}^{n} words exceed the enumeration budget {budget}")
    sup, inf, mag = _word_log_weights(wp, m, n)
    log_hi = _lse(sup, mag, upper=True)
    log_lo = _lse(inf, mag, upper=False)
    if size is None or size > m:
        y = 0.0 if wp.t >= 0 else 1.0
        law = _symbol_law(wp, y)
        tail = log_series(law, m + 1, size, eps=1e-7)
        if tail.kind != "finite":
            raise DivergenceError(f"symbol tail beyond {m} diverges for {sys.label}")
        head = finite_log_sum(law, 1, m)
        # (S + T)^n - S^n = S^n expm1(n log1p(T/S))
        ratio = math.exp(tail.log_sum.hi - head.hi)
        extra = n * head.hi + math.log(up(math.expm1(n * math.log1p(ratio))))
        big = max(log_hi, extra)
        log_hi = up(big + math.log1p(math.exp(min(log_hi, extra) - big)), 2)
    return Enclosure(down(log_lo / n), up(log_hi / n))


# -- dispatch ----------------------------------------------------------------
def _moebius_divergent(wp: WeightedPotential) -> bool:
    if wp.system.is_finite:
        return False
    law = MoebiusLaw(wp.system, wp.psi, float(wp.t), float(wp.beta), 0.0)
    return not law.growth.converges()


def _initial_delta(t: float, width: float) -> float:
    # the enclosure width is observed to be about delta * |t| / 3
    delta = min(2.0 * width / max(abs(t), 0.1), 1.0 / 64.0)
    return 2.0 ** math.floor(math.log2(delta))


def _transfer(wp: WeightedPotential, pol: DepthPolicy, sign_only: bool):
    """Cylinder-code enclosure refined until the target width (or sign) is met."""
    delta = 1.0 / 64.0 if sign_only else _initial_delta(float(wp.t), pol.target_width)
    # a sign search never refines past the resolution of the target width
    floor = _initial_delta(float(wp.t), pol.target_width) / 4.0
    enc, note, capped = None, "", False
    while True:
        try:
            tb = cylinder_transfer_bounds(wp, delta, pol.max_states)
        except BudgetError as exc:
            note = str(exc)
            if enc is not None or delta >= 1.0 / 64.0:
                break
            delta, capped = delta * 4.0, True
            continue
        enc = tb if enc is None else Enclosure(max(enc.lo, tb.lo), min(enc.hi, tb.hi))
        if enc.width <= pol.target_width:
            return enc, True, ""
        if sign_only and not enc.contains(0.0):
            return enc, True, ""
        if capped or delta < 1e-9 or (sign_only and delta <= floor):
            break
        delta /= 4.0
    return enc, False, note


def pressure(wp: WeightedPotential, pol: DepthPolicy | None = None,
             sign_only: bool = False) -> PressureValue:
    """Enclosure of ``P(t zeta + beta psi)`` under the effort policy ``pol``.

    Self-similar systems use the single-symbol series. Möbius systems
    intersect brute-force partition bounds (all depths up to ``max_depth``
    that fit the enumeration budget) with the cylinder-code bounds, refined
    until ``target_width`` is met. With ``sign_only`` the refinement stops as
    soon as the enclosure excludes 0.
    """
    pol = pol or DepthPolicy()
    sys = wp.system
    if sys.is_self_similar:
        return exact_series_pressure(wp, eps=pol.target_width)
    if _moebius_divergent(wp):
        return PressureValue.infinite("symbol tail diverges: 2t + (potential exponent) <= 1")

    enc = None
    m = pol.symbol_cap if sys.alphabet is None else min(pol.symbol_cap, sys.alphabet)
    for n in range(1, pol.max_depth + 1):
        if m ** n > pol.enum_budget:
            break
        pb = partition_bounds(wp, n, pol.symbol_cap, budget=pol.enum_budget)
        enc = pb if enc is None else Enclosure(max(enc.lo, pb.lo), min(enc.hi, pb.hi))
    tb, converged, note = _transfer(wp, pol, sign_only)
    if tb is not None:
        enc = tb if enc is None else Enclosure(max(enc.lo, tb.lo), min(enc.hi, tb.hi))
    if enc is None:
        return PressureValue.indeterminate(-math.inf, note)
    converged = converged or enc.width <= pol.target_width
    if not converged and not note:
        note = f"target width {pol.target_width:g} not reached"
    return PressureValue.finite(enc, converged, note if not converged else "")


def pressure_sign(wp: WeightedPotential, pol: DepthPolicy | None = None) -> Sign:
    """Certified sign of the pressure, or ``STRADDLING`` when undecided."""
    return sign_of(pressure(wp, pol, sign_only=True))


def sign_of(p: PressureValue) -> Sign:
    if p.kind == "inf" or p.lo > 0.0:
        return Sign.POSITIVE
    if p.kind == "finite" and p.hi < 0.0:
        return Sign.NEGATIVE
    return Sign.STRADDLING
