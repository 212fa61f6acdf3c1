"""Spectra as grid Legendre conjugates ``f(alpha) = inf_beta (t(beta) + beta alpha)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .free_energy import FreeEnergyCurve, SlopeReport, slopes

INTERIOR = "interior"
BOUNDARY = "boundary_or_exterior"


class Conjugate(NamedTuple):
    """Result of a grid conjugation.

    ``value`` is ``-inf`` (the sentinel) only when ``diverging`` is set: the
    infimum sits at a grid edge that does not bound the effective domain and
    the values keep decreasing towards it.
    """

    value: float
    beta: float
    at_edge: bool
    diverging: bool


def _finite_arrays(curve: FreeEnergyCurve):
    pts = curve.finite
    if not pts:
        raise ValueError("the curve has no finite point")
    return np.array([p.beta for p in pts]), np.array([p.mid for p in pts])


def conjugate(curve: FreeEnergyCurve, alpha: float) -> Conjugate:
    """``inf`` over finite grid points of ``t(beta) + beta * alpha`` (midpoints)."""
    b, m = _finite_arrays(curve)
    vals = m + b * alpha
    i = int(np.argmin(vals))
    k = len(vals)
    at_edge = i == 0 or i == k - 1
    diverging = False
    if at_edge and k >= 3:
        if i == 0 and not math.isfinite(curve.dom_lo):
            trend = vals[:3]
            diverging = bool(trend[0] < trend[1] < trend[2])
        elif i == k - 1 and not math.isfinite(curve.dom_hi):
            trend = vals[-3:]
            diverging = bool(trend[2] < trend[1] < trend[0])
    value = -math.inf if diverging else float(vals[i])
    return Conjugate(value, float(b[i]), at_edge, diverging)


@dataclass(frozen=True)
class SpectrumPoint:
    """``value`` is clamped below at 0; ``raw`` keeps the conjugate itself."""

    alpha: float
    value: float
    raw: float
    region: str
    clamped: bool = False
    sentinel: bool = False
    anomaly: bool = False


@dataclass(frozen=True)
class SpectrumCurve:
    points: tuple
    alpha_minus: float
    alpha_plus: float
    anomalies: tuple = ()

    @property
    def alphas(self) -> np.ndarray:
        return np.array([p.alpha for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])


def spectrum(curve: FreeEnergyCurve, alpha_grid, slope_report: SlopeReport | None = None,
             ) -> SpectrumCurve:
    """Conjugate on ``alpha_grid`` with interior/boundary labels.

    A point is interior when it lies inside ``(alpha_minus, alpha_plus)``
    and its infimum is attained away from the ends of the beta grid.
    Negative values are clamped to 0; a clamp on an interior point is
    reported as an anomaly.
    """
    grid = np.asarray([float(a) for a in alpha_grid])
    sr = slope_report or slopes(curve)
    a_lo, a_hi = sr.alpha_minus, sr.alpha_plus
    pts, anomalies = [], []
    for a in grid:
        c = conjugate(curve, float(a))
        interior = a_lo < a < a_hi and not c.at_edge
        region = INTERIOR if interior else BOUNDARY
        clamped = c.value < 0.0
        value = max(c.value, 0.0)
        anomaly = clamped and interior
        if anomaly:
            anomalies.append(f"alpha={a:g}: interior conjugate {c.value:.6g} clamped to 0")
        pts.append(SpectrumPoint(float(a), value, c.value, region, clamped, c.diverging, anomaly))
    return SpectrumCurve(tuple(pts), a_lo, a_hi, tuple(anomalies))


def lower_hull(b: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Values at ``b`` of the greatest convex minorant of the points ``(b, m)``.

    On a finite grid this is the biconjugate ``t**`` restricted to the grid.
    """
    hull = []
    for i in range(len(b)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            # drop i1 when it lies on or above the chord i0 -> i
            if (m[i1] - m[i0]) * (b[i] - b[i0]) >= (m[i] - m[i0]) * (b[i1] - b[i0]):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.interp(b, b[hull], m[hull])


def biconjugate_gap(curve: FreeEnergyCurve) -> float:
    """``max (t - t**)`` over the finite grid points (0 for convex data)."""
    b, m = _finite_arrays(curve)
    if len(b) < 3:
        raise ValueError("need at least 3 finite points")
    return float(np.max(m - lower_hull(b, m)))
