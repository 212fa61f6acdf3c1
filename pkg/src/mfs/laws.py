"""Per-symbol term laws ``log g(e)`` of the single-symbol pressure series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .potential import PotentialSpec
from .series import Growth
from .system import SystemSpec


class DivergenceError(ArithmeticError):
    """A series needed for an upper bound diverges."""


class BudgetError(RuntimeError):
    """A word enumeration would exceed its budget."""


@dataclass(frozen=True)
class SelfSimilarLaw:
    """``log(r_e^t exp(beta c_e))`` for an affine family."""

    system: SystemSpec
    psi: PotentialSpec
    t: float
    beta: float
    growth: Growth = field(init=False)

    def __post_init__(self):
        g = Growth()
        if self.system.family != "finite":
            k, m = self.system.ratio_growth()
            a, b = self.psi.growth(self.beta) if self.psi.kind != "list" else (0.0, 0.0)
            g = Growth(a, self.t * k + b, self.t * m)
        object.__setattr__(self, "growth", g)

    def _c(self, x, lx):
        if self.psi.kind == "list":
            return self.psi.value(x)
        return self.psi.law(x, lx)

    def _logr(self, x, lx):
        if self.system.family == "finite":
            return self.system.log_ratio(x)
        return self.system.log_ratio_law(x, lx)

    def log(self, x, lx):
        out = np.zeros_like(np.asarray(lx, dtype=float))
        if self.t != 0.0:
            out = out + self.t * self._logr(x, lx)
        if self.beta != 0.0:
            out = out + self.beta * self._c(x, lx)
        return out

    def dlog(self, x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        if self.t != 0.0:
            out = out + self.t * self.system.dlog_ratio_law(x)
        if self.beta != 0.0:
            out = out + self.beta * self.psi.derivative(x)
        return out

    def d2log(self, x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        if self.t != 0.0:
            out = out + self.t * self.system.d2log_ratio_law(x)
        if self.beta != 0.0:
            out = out + self.beta * self.psi.second_derivative(x)
        return out

    def magnitude(self, x, lx):
        out = np.zeros_like(np.asarray(lx, dtype=float))
        if self.t != 0.0:
            out = out + abs(self.t) * np.abs(self._logr(x, lx))
        if self.beta != 0.0:
            out = out + abs(self.beta) * np.abs(self._c(x, lx))
        return out


@dataclass(frozen=True)
class MoebiusLaw:
    """``log(exp(beta c_e) (d_e + y)^(-2t))`` for a Möbius family at fixed ``y``."""

    system: SystemSpec
    psi: PotentialSpec
    t: float
    beta: float
    y: float
    growth: Growth = field(init=False)

    def __post_init__(self):
        a, b = self.psi.growth(self.beta) if self.psi.kind != "list" else (0.0, 0.0)
        object.__setattr__(self, "growth", Growth(a, 2.0 * self.t + b, 0.0))

    def _c(self, x, lx):
        if self.psi.kind == "list":
            return self.psi.value(x)
        return self.psi.law(x, lx)

    def log(self, x, lx):
        out = np.zeros_like(np.asarray(lx, dtype=float))
        if self.t != 0.0:
            out = out - 2.0 * self.t * self.system.log_shift_law(x, lx, self.y)
        if self.beta != 0.0:
            out = out + self.beta * self._c(x, lx)
        return out

    def dlog(self, x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        if self.t != 0.0:
            out = out - 2.0 * self.t * self.system.dlog_shift_law(x, self.y)
        if self.beta != 0.0:
            out = out + self.beta * self.psi.derivative(x)
        return out

    def d2log(self, x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        if self.t != 0.0:
            out = out - 2.0 * self.t * self.system.d2log_shift_law(x, self.y)
        if self.beta != 0.0:
            out = out + self.beta * self.psi.second_derivative(x)
        return out

    def magnitude(self, x, lx):
        out = np.zeros_like(np.asarray(lx, dtype=float))
        if self.t != 0.0:
            out = out + 2.0 * abs(self.t) * np.abs(self.system.log_shift_law(x, lx, self.y))
        if self.beta != 0.0:
            out = out + abs(self.beta) * np.abs(self._c(x, lx))
        return out
