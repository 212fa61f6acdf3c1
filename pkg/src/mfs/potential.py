"""Locally constant potentials and Birkhoff-sum enclosures on cylinders."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .enclosure import Enclosure
from .system import SystemSpec, distortion_constant, ratio_bounds

KINDS = ("negid", "neg2log", "const", "list", "geometric")


@dataclass(frozen=True)
class PotentialSpec:
    """A potential depending on the first symbol only, or the geometric one.

    ``negid`` gives ``c_e = -e``, ``neg2log`` gives ``c_e = -2 log e``,
    ``const`` a constant ``c`` and ``list`` explicit per-symbol values.
    ``geometric`` stands for ``log |phi'_{w_1}|`` itself.
    """

    kind: str
    c: float = 0.0
    values: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential {self.kind!r}")
        if self.kind == "list" and not self.values:
            raise ValueError("an explicit potential needs values")

    @property
    def is_depth1(self) -> bool:
        return self.kind != "geometric"

    def value(self, e) -> np.ndarray:
        """Per-symbol value ``c_e`` (vectorized over ``e``)."""
        e = np.asarray(e, dtype=float)
        if self.kind == "negid":
            return -e
        if self.kind == "neg2log":
            return -2.0 * np.log(e)
        if self.kind == "const":
            return np.full_like(e, self.c)
        if self.kind == "list":
            idx = e.astype(int) - 1
            if np.any(idx >= len(self.values)):
                raise ValueError("explicit potential is shorter than the alphabet")
            return np.asarray(self.values, dtype=float)[idx]
        raise ValueError("the geometric potential has no per-symbol law")

    def derivative(self, x) -> np.ndarray:
        """``d c / d e`` of the law extended to real ``e`` (used for tails)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "negid":
            return np.full_like(x, -1.0)
        if self.kind == "neg2log":
            return -2.0 / x
        return np.zeros_like(x)

    def second_derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "neg2log":
            return 2.0 * (1.0 / x) ** 2
        return np.zeros_like(x)

    def law(self, x, lx):
        """``c_x`` at real ``x`` with ``lx = log x`` (finite at ``x = inf``)."""
        if self.kind == "negid":
            return -np.asarray(x, dtype=float)
        if self.kind == "neg2log":
            return -2.0 * np.asarray(lx, dtype=float)
        if self.kind == "const":
            return np.full_like(np.asarray(x, dtype=float), self.c)
        raise ValueError(f"{self.kind} has no law on an infinite alphabet")

    def growth(self, beta: float) -> tuple[float, float]:
        """Contribution ``(A, B)`` of ``beta * c_x`` to ``-A x - B log x``."""
        if beta == 0.0:
            return 0.0, 0.0
        if self.kind == "negid":
            return beta, 0.0
        if self.kind == "neg2log":
            return 0.0, 2.0 * beta
        return 0.0, 0.0

    @property
    def label(self) -> str:
        if self.kind == "const":
            return f"const:c={self.c:g}"
        if self.kind == "list":
            return "list:" + ",".join(f"{v:g}" for v in self.values)
        return self.kind


def neg_identity() -> PotentialSpec:
    return PotentialSpec("negid")


def neg_two_log() -> PotentialSpec:
    return PotentialSpec("neg2log")


def constant(c: float) -> PotentialSpec:
    return PotentialSpec("const", c=float(c))


def explicit(values: Sequence[float]) -> PotentialSpec:
    return PotentialSpec("list", values=tuple(float(v) for v in values))


def geometric() -> PotentialSpec:
    return PotentialSpec("geometric")


@dataclass(frozen=True)
class WeightedPotential:
    """The potential ``t * zeta + beta * psi`` over ``system``.

    A geometric ``psi`` is folded into the ``zeta`` coefficient on
    construction, so ``psi`` is always depth-1 afterwards.
    """

    t: float
    beta: float
    system: SystemSpec
    psi: PotentialSpec

    def __post_init__(self):
        if self.psi.kind == "geometric":
            object.__setattr__(self, "t", float(self.t) + float(self.beta))
            object.__setattr__(self, "beta", 0.0)
            object.__setattr__(self, "psi", constant(0.0))
        if self.psi.kind == "list" and not self.system.is_finite:
            raise ValueError("explicit potentials need a finite alphabet")
        if self.psi.kind == "list" and len(self.psi.values) < self.system.size:
            raise ValueError("explicit potential is shorter than the alphabet")

    def with_t(self, t: float) -> "WeightedPotential":
        return WeightedPotential(t, self.beta, self.system, self.psi)


def birkhoff_bounds(wp: WeightedPotential, w: Sequence[int]) -> Enclosure:
    """Enclosure of ``S_|w| (t zeta + beta psi)`` over the cylinder ``[w]``."""
    w = wp.system.check_word(w)
    psi_sum = wp.beta * math.fsum(float(v) for v in wp.psi.value(list(w)))
    if wp.t == 0.0:
        return Enclosure(psi_sum, psi_sum)
    rb = ratio_bounds(wp.system, w)
    if rb.width == 0.0:
        v = wp.t * math.log(rb.lo) + psi_sum
        return Enclosure(v, v)
    return rb.log().scale(wp.t) + psi_sum


def distortion_bound(wp: WeightedPotential) -> float:
    """``K`` bounding the oscillation of Birkhoff sums on cylinders by ``log K``."""
    return distortion_constant(wp.system) ** abs(wp.t)
