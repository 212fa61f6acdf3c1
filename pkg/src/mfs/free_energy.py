"""Free energy ``t(beta) = inf {t : P(t zeta + beta psi) <= 0}`` and its slopes.

``free_energy_at`` bisects on ``t`` using certified pressure signs: a
negative pressure at ``t_hi`` gives ``t(beta) <= t_hi`` and a positive (or
infinite) pressure at ``t_lo`` gives ``t(beta) >= t_lo`` since the pressure
is nonincreasing in ``t``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .potential import PotentialSpec, WeightedPotential
from .pressure import DepthPolicy, PressureValue, Sign, pressure, sign_of
from .system import SystemSpec
from .transfer import reset_warm_starts

T_CAP = 4096.0


@dataclass(frozen=True)
class FreeEnergyPoint:
    """Enclosure ``[lo, hi]`` of ``t(beta)``, or ``infinite``.

    ``zero_exists`` is set when the lower bracket end carries a finite
    positive pressure, so that the pressure changes sign across the bracket.
    It is false when the infimum is reached by a jump from ``+inf``.
    """

    beta: float
    lo: float
    hi: float
    infinite: bool = False
    zero_exists: bool = False
    warnings: tuple = ()

    @classmethod
    def plus_infinity(cls, beta: float, note: str = "") -> "FreeEnergyPoint":
        return cls(beta, math.inf, math.inf, True, False, (note,) if note else ())

    @property
    def is_finite(self) -> bool:
        return not self.infinite and math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi) if self.is_finite else math.inf

    @property
    def width(self) -> float:
        return self.hi - self.lo if self.is_finite else math.inf


@dataclass(frozen=True)
class FreeEnergyCurve:
    """Sampled free energy on an increasing ``beta`` grid.

    ``dom_lo`` / ``dom_hi`` are the outermost finite grid points when an
    infinite point lies beyond them, and ``-inf`` / ``inf`` otherwise.
    ``convexity_defect`` is the largest excess of a midpoint over the chord
    of its neighbours beyond the three enclosure widths.
    """

    points: tuple
    system: SystemSpec | None = None
    psi: PotentialSpec | None = None
    tol: float = 1e-3
    dom_lo: float = -math.inf
    dom_hi: float = math.inf
    convexity_defect: float = 0.0
    warnings: tuple = ()

    @property
    def betas(self) -> np.ndarray:
        return np.array([p.beta for p in self.points])

    @property
    def finite(self) -> list:
        return [p for p in self.points if p.is_finite]

    @property
    def max_width(self) -> float:
        w = [p.width for p in self.finite]
        return max(w) if w else 0.0

    @classmethod
    def from_values(cls, betas, values, width: float = 0.0) -> "FreeEnergyCurve":
        """Curve from plain values (``inf`` marks infinite points); for tests and demos."""
        pts = []
        for b, v in zip(betas, values):
            if math.isinf(v):
                pts.append(FreeEnergyPoint.plus_infinity(float(b)))
            else:
                pts.append(FreeEnergyPoint(float(b), v - width / 2, v + width / 2, zero_exists=True))
        return _assemble(pts, None, None, 1e-3)


def _certified_infinite(sys: SystemSpec, psi: PotentialSpec, beta: float) -> bool:
    # terms exp(beta c_e) r_e^t with c_e = -e grow exponentially when beta < 0,
    # whatever t is, so every pressure is +inf
    return (not sys.is_finite) and psi.kind == "negid" and beta < 0.0


@dataclass
class _Oracle:
    wp: WeightedPotential
    pol: DepthPolicy
    escalations: int = 3
    seen: dict = field(default_factory=dict)
    note: str = ""

    def __call__(self, t: float) -> tuple[Sign, PressureValue]:
        if t in self.seen:
            return self.seen[t]
        wp = self.wp.with_t(t)
        pol = self.pol
        p = pressure(wp, pol, sign_only=True)
        s = sign_of(p)
        k = 0
        while s is Sign.STRADDLING and p.is_finite and k < self.escalations:
            pol = pol.refined(4.0)
            p = pressure(wp, pol, sign_only=True)
            s = sign_of(p)
            k += 1
        if p.kind == "indeterminate" and s is Sign.STRADDLING:
            self.note = p.note or "pressure upper bound not certified"
        self.seen[t] = (s, p)
        return s, p


def free_energy_at(sys: SystemSpec, psi: PotentialSpec, beta: float, tol: float = 1e-3,
                   pol: DepthPolicy | None = None, t_cap: float = T_CAP) -> FreeEnergyPoint:
    """Enclosure of ``t(beta)`` of width at most ``tol`` (when certifiable).

    Parameters
    ----------
    sys, psi : SystemSpec, PotentialSpec
        The system and the depth-1 (or geometric) potential.
    beta : float
        Coefficient of ``psi``.
    tol : float
        Requested enclosure width.
    pol : DepthPolicy, optional
        Effort policy for the pressure evaluations.
    t_cap : float
        Bracket growth stops at ``|t| = t_cap``.

    Returns
    -------
    FreeEnergyPoint
        ``infinite`` only under an analytic divergence certificate. A bracket
        that could not be closed is returned wide, with a warning.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    beta = float(beta)
    pol = pol or DepthPolicy(target_width=tol)
    if _certified_infinite(sys, psi, beta):
        return FreeEnergyPoint.plus_infinity(beta, "exp(-beta e) terms diverge for every t")
    wp = WeightedPotential(0.0, beta, sys, psi)
    reset_warm_starts()
    oracle = _Oracle(wp, pol)
    warnings = []

    t_lo, t_hi = -math.inf, math.inf
    s1, _ = oracle(1.0)
    if s1 is Sign.NEGATIVE:
        t_hi = 1.0
        t = 0.0
        while t >= -t_cap:
            s, _ = oracle(t)
            if s is Sign.POSITIVE:
                t_lo = t
                break
            if s is Sign.NEGATIVE:
                t_hi = t
            t = -1.0 if t == 0.0 else 2.0 * t
    else:
        if s1 is Sign.POSITIVE:
            t_lo = 1.0
        t = 0.0 if s1 is Sign.STRADDLING else 2.0
        if s1 is Sign.STRADDLING:
            s0, _ = oracle(0.0)
            if s0 is Sign.POSITIVE:
                t_lo = 0.0
            t = 2.0
        while t <= t_cap:
            s, _ = oracle(t)
            if s is Sign.NEGATIVE:
                t_hi = t
                break
            if s is Sign.POSITIVE:
                t_lo = t
            t *= 2.0
    if math.isinf(t_hi):
        warnings.append(f"pressure not negative up to t = {t_cap:g}; t(beta) > {t_lo:g}")
        return FreeEnergyPoint(beta, t_lo, math.inf, False, False, tuple(warnings))
    if math.isinf(t_lo):
        warnings.append(f"pressure not positive down to t = {-t_cap:g}")
        return FreeEnergyPoint(beta, -math.inf, t_hi, False, False, tuple(warnings))

    while t_hi - t_lo > tol:
        m = 0.5 * (t_lo + t_hi)
        s, _ = oracle(m)
        if s is Sign.NEGATIVE:
            t_hi = m
            continue
        if s is Sign.POSITIVE:
            t_lo = m
            continue
        # undecided near the root: probe symmetric points around m
        h = min(tol / 4.0, (t_hi - t_lo) / 4.0)
        progressed = False
        while h < 0.5 * (t_hi - t_lo):
            width = t_hi - t_lo
            sa, _ = oracle(m - h)
            sb, _ = oracle(m + h)
            if sa is Sign.POSITIVE:
                t_lo = max(t_lo, m - h)
            elif sa is Sign.NEGATIVE:
                t_hi = min(t_hi, m - h)
            if sb is Sign.NEGATIVE:
                t_hi = min(t_hi, m + h)
            elif sb is Sign.POSITIVE:
                t_lo = max(t_lo, m + h)
            progressed = t_hi - t_lo < width
            if progressed:
                break
            h *= 2.0
        if not progressed:
            warnings.append("pressure sign undecided inside the bracket; enclosure wider than tol")
            break
    if oracle.note:
        warnings.append(oracle.note)
    _, p_lo = oracle(t_lo)
    zero_exists = p_lo.is_finite and p_lo.lo > 0.0
    return FreeEnergyPoint(beta, t_lo, t_hi, False, zero_exists, tuple(warnings))


def _assemble(points, sys, psi, tol) -> FreeEnergyCurve:
    fin = [i for i, p in enumerate(points) if p.is_finite]
    dom_lo = dom_hi = math.nan
    warnings = []
    if fin:
        first, last = fin[0], fin[-1]
        dom_lo = points[first].beta if any(p.infinite for p in points[:first]) else -math.inf
        dom_hi = points[last].beta if any(p.infinite for p in points[last + 1:]) else math.inf
    defect = 0.0
    for i, j, k in zip(fin, fin[1:], fin[2:]):
        b1, b2, b3 = points[i].beta, points[j].beta, points[k].beta
        chord = (points[i].mid * (b3 - b2) + points[k].mid * (b2 - b1)) / (b3 - b1)
        excess = points[j].mid - chord - (points[i].width + points[j].width + points[k].width)
        defect = max(defect, excess)
    if defect > 0:
        warnings.append(f"convexity defect {defect:.3g} beyond enclosure widths")
    for p in points:
        warnings.extend(f"beta={p.beta:g}: {w}" for w in p.warnings)
    return FreeEnergyCurve(tuple(points), sys, psi, tol, dom_lo, dom_hi, defect, tuple(warnings))


def free_energy_curve(sys: SystemSpec, psi: PotentialSpec, beta_grid, tol: float = 1e-3,
                      pol: DepthPolicy | None = None, workers: int | None = None,
                      t_cap: float = T_CAP, min_points: int = 3) -> FreeEnergyCurve:
    """Evaluate ``free_energy_at`` on a strictly increasing grid.

    Slopes and conjugates need at least 3 points; ``min_points`` lowers the
    bar for callers that only want the point values.
    """
    grid = [float(b) for b in beta_grid]
    if len(grid) < min_points or any(b >= c for b, c in zip(grid, grid[1:])):
        raise ValueError(f"beta grid must be strictly increasing with at least {min_points} points")

    def one(b):
        return free_energy_at(sys, psi, b, tol, pol, t_cap)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            points = list(ex.map(one, grid))
    else:
        points = [one(b) for b in grid]
    return _assemble(points, sys, psi, tol)


@dataclass(frozen=True)
class SlopeReport:
    """One-sided difference quotients of ``t`` and the ``alpha`` estimates.

    ``left[i]`` / ``right[i]`` are the backward / forward quotients at the
    finite grid point ``betas[i]`` (``nan`` where undefined). ``alpha_minus``
    and ``alpha_plus`` come with an error estimate equal to the local slope
    variation plus the enclosure widths over the grid step. When the domain
    is bounded on the side that determines an estimate, that estimate is
    flagged ``extrapolated``.

    A flat tail (consecutive values equal within ``tol`` with no sign change
    of the pressure) is reported through ``flat_from`` and ``alpha_kink``,
    the negated slope of the secant entering it.
    """

    betas: np.ndarray
    left: np.ndarray
    right: np.ndarray
    alpha_minus: float
    alpha_plus: float
    alpha_minus_err: float
    alpha_plus_err: float
    alpha_minus_extrapolated: bool
    alpha_plus_extrapolated: bool
    flat_from: float | None = None
    alpha_kink: float | None = None


def slopes(curve: FreeEnergyCurve) -> SlopeReport:
    pts = curve.finite
    if len(pts) < 2:
        raise ValueError("need at least 2 finite points")
    b = np.array([p.beta for p in pts])
    m = np.array([p.mid for p in pts])
    w = np.array([p.width for p in pts])
    q = np.diff(m) / np.diff(b)
    qerr = (w[:-1] + w[1:]) / np.diff(b)
    k = len(pts)
    left = np.concatenate([[np.nan], q])
    right = np.concatenate([q, [np.nan]])
    lo_bounded = math.isfinite(curve.dom_lo)
    hi_bounded = math.isfinite(curve.dom_hi)
    # points at a boundary of the effective domain are not interior
    interior = np.ones(k, dtype=bool)
    if lo_bounded:
        interior[0] = False
    if hi_bounded:
        interior[-1] = False
    li = [i for i in range(1, k) if interior[i]]
    ri = [i for i in range(k - 1) if interior[i]]
    if not li:
        li = list(range(1, k))
    if not ri:
        ri = list(range(k - 1))
    i_min = max(li, key=lambda i: q[i - 1])
    i_plus = min(ri, key=lambda i: q[i])
    a_minus = -float(q[i_min - 1])
    a_plus = -float(q[i_plus])

    def err(j):
        var = abs(q[j] - q[j - 1]) if 0 < j < len(q) else (abs(q[j] - q[j + 1]) if j + 1 < len(q) else 0.0)
        return float(var + qerr[j])

    flat_from = alpha_kink = None
    j = k - 1
    while j > 0 and abs(m[j] - m[j - 1]) <= curve.tol and not pts[j - 1].zero_exists:
        j -= 1
    if j < k - 2 and not pts[k - 1].zero_exists:
        flat_from = float(b[j])
        if j > 0:
            alpha_kink = -float(q[j - 1])
    return SlopeReport(b, left, right, a_minus, a_plus, err(i_min - 1), err(i_plus),
                       hi_bounded, lo_bounded, flat_from, alpha_kink)
