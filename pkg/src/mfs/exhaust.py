"""Exhaustion by truncated alphabets and distances between systems.

``exhaust_run`` computes free energies, spectra and boundary slopes of the
truncations ``I_n = {1..n}`` and collects convergence diagnostics. The
phase-transition flags are reporting heuristics with fixed thresholds.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .enclosure import Enclosure, up
from .free_energy import FreeEnergyCurve, free_energy_curve, slopes
from .legendre import BOUNDARY, INTERIOR, conjugate
from .potential import PotentialSpec
from .pressure import DepthPolicy
from .system import SystemSpec, truncate

COLLAPSE_F = 0.02
COLLAPSE_INTERIOR = 0.1
KINK_FACTOR = 10.0


# -- distances ---------------------------------------------------------------
def _same_map(a: SystemSpec, b: SystemSpec, i: int) -> bool:
    if a.family != b.family or a.params != b.params:
        return False
    if a.family != "finite":
        return True
    same_ratio = a.ratios[i - 1] == b.ratios[i - 1]
    if a.offsets is None or b.offsets is None:
        return same_ratio and a.offsets is b.offsets
    return same_ratio and a.offsets[i - 1] == b.offsets[i - 1]


def _second_derivative_bound(sys: SystemSpec, i: int) -> float:
    if sys.is_moebius:
        return 2.0 / float(sys.exact_shift(i)) ** 3
    return 0.0


def _sup_norms(a: SystemSpec, b: SystemSpec, i: int, grid: int) -> tuple[Enclosure, Enclosure]:
    """Enclosures of ``||phi^a_i - phi^b_i||`` and ``||(phi^a_i)' - (phi^b_i)'||`` on [0, 1]."""
    x = np.linspace(0.0, 1.0, grid)
    h = 1.0 / (grid - 1)
    d0 = float(np.max(np.abs(a.phi(i, x) - b.phi(i, x))))
    d1 = float(np.max(np.abs(a.dphi(i, x) - b.dphi(i, x))))
    # between grid points a Lipschitz function exceeds its sampled max by <= L h / 2
    lip0 = float(a.sup_derivative(i)) + float(b.sup_derivative(i))
    lip1 = _second_derivative_bound(a, i) + _second_derivative_bound(b, i)
    slack = 8 * np.finfo(float).eps
    return (Enclosure(max(d0 - slack, 0.0), up(d0 + lip0 * h / 2 + slack)),
            Enclosure(max(d1 - slack, 0.0), up(d1 + lip1 * h / 2 + slack)))


def rho_distance(sys_a: SystemSpec, sys_b: SystemSpec, depth: int, grid: int = 4097) -> Enclosure:
    """Enclosure of the weighted distance between two systems.

    Symbols ``i <= depth`` present in both contribute ``2^-i`` times the sup
    distance of the maps plus that of their derivatives; symbols present in
    only one contribute ``2^-i``. Beyond ``depth`` the sum is exact when the
    two systems share their maps (truncations of one family) and is bounded
    by ``3 * 2^-depth`` otherwise.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    for s in (sys_a, sys_b):
        if not s.has_maps():
            raise ValueError(f"{s.label} has no explicit maps")
    lo = hi = 0.0
    shared_maps = True
    for i in range(1, depth + 1):
        ina, inb = sys_a.contains(i), sys_b.contains(i)
        w = 2.0 ** -i
        if ina and inb:
            if _same_map(sys_a, sys_b, i):
                continue
            shared_maps = False
            n0, n1 = _sup_norms(sys_a, sys_b, i, grid)
            lo += w * (n0.lo + n1.lo)
            hi += w * (n0.hi + n1.hi)
        elif ina or inb:
            lo += w
            hi += w
    # tail i > depth
    if shared_maps and sys_a.family == sys_b.family and sys_a.params == sys_b.params \
            and sys_a.family != "finite":
        na = sys_a.alphabet or math.inf
        nb = sys_b.alphabet or math.inf
        small, big = min(na, nb), max(na, nb)
        start = max(depth, small)
        tail = 0.0 if start >= big else 2.0 ** -start - (0.0 if math.isinf(big) else 2.0 ** -big)
        lo += tail
        hi += tail
    else:
        bounded = sys_a.is_finite and sys_b.is_finite and max(sys_a.alphabet, sys_b.alphabet) <= depth
        if not bounded:
            hi += 3.0 * 2.0 ** -depth
    return Enclosure(lo, up(hi))


@dataclass(frozen=True)
class LambdaCheck:
    passed: bool
    worst_ratio: float
    worst_symbol: int | None
    checked: int
    tail_ratio: tuple | None = None


def _log_sup_derivative_law(sys: SystemSpec, x: np.ndarray) -> np.ndarray:
    lx = np.log(x)
    if sys.is_moebius:
        return -2.0 * sys.log_shift_law(x, lx, 0.0)
    return sys.log_ratio_law(x, lx)


def lambda_ratio_check(sys_n: SystemSpec, sys: SystemSpec, R: float, cap: int = 4096) -> LambdaCheck:
    """Check ``R^-1 <= ||(phi^n_e)'|| / ||phi_e'|| <= R`` on the shared symbols.

    Symbols up to the smaller alphabet (or ``cap``) are checked one by one.
    When both alphabets are infinite the law-level ratio beyond ``cap`` is
    checked through the asymptotic exponents and a dense geometric sample.
    """
    if not R > 1.0:
        raise ValueError("R must exceed 1")
    if sys.is_finite and (not sys_n.is_finite or sys_n.alphabet > sys.alphabet):
        raise ValueError("alphabets are not nested")
    m = cap if sys_n.alphabet is None else min(sys_n.alphabet, cap if sys.alphabet is None else sys.alphabet)
    e = np.arange(1, m + 1)
    logr = np.log(sys_n.sup_derivative(e)) - np.log(sys.sup_derivative(e))
    i = int(np.argmax(np.abs(logr)))
    worst, worst_e = float(np.exp(logr[i])), int(e[i])
    ok = bool(np.all(np.abs(logr) <= math.log(R)))
    tail = None
    if sys_n.alphabet is None and sys.alphabet is None and sys_n.family != "finite":
        def growth(s):
            return (2.0, 0.0) if s.is_moebius else s.ratio_growth()
        if growth(sys_n) != growth(sys):
            ok, tail = False, (0.0, math.inf)
        else:
            x = (cap + 1.0) * np.power(1.1, np.arange(0, 7000))
            x = x[x < 1e300]
            lt = _log_sup_derivative_law(sys_n, x) - _log_sup_derivative_law(sys, x)
            tail = (float(np.exp(lt.min())), float(np.exp(lt.max())))
            if np.max(np.abs(lt)) > abs(math.log(worst)):
                j = int(np.argmax(np.abs(lt)))
                worst, worst_e = float(np.exp(lt[j])), None
            ok = ok and bool(np.all(np.abs(lt) <= math.log(R)))
    return LambdaCheck(ok, worst, worst_e, m, tail)


@dataclass(frozen=True)
class RegularCertificate:
    """Regular convergence of the truncations ``(Phi^n, psi^n)`` to ``(Phi, psi)``.

    Restricting to a sub-alphabet only removes words from cylinder suprema,
    so the domination inequality holds with ``k = 1`` and ``C = 1``.
    """

    system: str
    potential: str
    k: int = 1
    C: float = 1.0
    reason: str = "restriction to I_n never increases cylinder suprema"
    vacuous_beyond: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def regular_certificate_exhausting(sys: SystemSpec, psi: PotentialSpec) -> RegularCertificate:
    return RegularCertificate(sys.label, psi.label,
                              vacuous_beyond=sys.alphabet if sys.family == "finite" else None)


# -- exhaustion ----------------------------------------------------------------
@dataclass
class ExhaustRecord:
    n: int
    curve: FreeEnergyCurve
    t_lo: list
    t_hi: list
    f: list
    f_regions: list
    alpha_minus: float
    alpha_plus: float
    f_at_alpha_plus: float
    interior_max: float
    rho_to_full: Enclosure
    boundary_collapse: bool
    kink: bool
    max_slope_jump: float


@dataclass
class ConvergenceReport:
    """Per-``n`` records plus summary diagnostics (flags are heuristics)."""

    system: str
    potential: str
    betas: list
    alphas: list
    records: list
    t_increments: list
    f_increments: list
    boundary_collapse: bool
    escaping_boundary: bool
    kink: bool
    certificate: RegularCertificate
    policy: DepthPolicy
    tol: float
    warnings: list = field(default_factory=list)

    def alpha_plus(self) -> list:
        return [r.alpha_plus for r in self.records]

    def alpha_minus(self) -> list:
        return [r.alpha_minus for r in self.records]


def _slope_jump(curve: FreeEnergyCurve) -> tuple[bool, float]:
    """Largest slope jump and whether it exceeds 10x the local median variation."""
    pts = curve.finite
    if len(pts) < 5:
        return False, 0.0
    b = np.array([p.beta for p in pts])
    m = np.array([p.mid for p in pts])
    q = np.diff(m) / np.diff(b)
    dq = np.abs(np.diff(q))
    floor = 2.0 * curve.max_width / float(np.min(np.diff(b)))
    flagged, jump = False, float(dq.max())
    for i, d in enumerate(dq):
        near = np.concatenate([dq[max(0, i - 3):i], dq[i + 1:i + 4]])
        if d > floor and d > KINK_FACTOR * max(float(np.median(near)), floor):
            flagged = True
    return flagged, jump


def _escaping(ns, aplus) -> bool:
    if len(ns) < 3 or not all(np.isfinite(aplus)):
        return False
    a = np.asarray(aplus)
    if not np.all(np.diff(a) > 0):
        return False
    rate = np.diff(a) / np.diff(np.log(ns))
    return bool(rate[-1] >= 0.5 * rate[0])


def exhaust_run(sys: SystemSpec, psi: PotentialSpec, n_list, beta_probes, alpha_probes,
                tol: float = 1e-3, pol: DepthPolicy | None = None, workers: int | None = None,
                rho_depth: int | None = None) -> ConvergenceReport:
    """Free energies and spectra of the truncations ``sys | {1..n}`` for ``n`` in ``n_list``.

    ``alpha_plus`` / ``alpha_minus`` per ``n`` come from the boundary slopes
    of the sampled ``t_n``. The summary flags:

    * boundary collapse: ``f_n(alpha_plus^n) <= 0.02`` while some interior
      probe has ``f_n >= 0.1`` (for every ``n``);
    * escaping boundary: ``alpha_plus^n`` increasing without saturating in
      ``log n``;
    * kink: a slope jump of ``t_n`` above 10 times the median slope variation.
    """
    ns = [int(n) for n in n_list]
    if not ns or any(a >= b for a, b in zip(ns, ns[1:])):
        raise ValueError("n_list must be nonempty and strictly increasing")
    pol = pol or DepthPolicy(target_width=tol)
    betas = [float(b) for b in beta_probes]
    alphas = [float(a) for a in alpha_probes]
    records, warnings = [], []
    for n in ns:
        sys_n = truncate(sys, n)
        curve = free_energy_curve(sys_n, psi, betas, tol, pol, workers)
        sr = slopes(curve)
        fs, regions = [], []
        for a in alphas:
            c = conjugate(curve, a)
            fs.append(c.value)
            inside = sr.alpha_minus < a < sr.alpha_plus and not c.at_edge
            regions.append(INTERIOR if inside else BOUNDARY)
        interior = [f for f, r in zip(fs, regions) if r == INTERIOR and math.isfinite(f)]
        interior_max = max(interior) if interior else -math.inf
        # alpha_plus is a secant slope at the grid edge, where the conjugate's
        # divergence sentinel would fire on a tie; take the plain grid minimum
        fin = curve.finite
        f_plus = min(p.mid + p.beta * sr.alpha_plus for p in fin)
        depth = rho_depth or min(n + 8, 60)
        try:
            rho = rho_distance(sys, sys_n, depth)
        except ValueError:
            rho = Enclosure(-math.inf, math.inf)
        kink, jump = _slope_jump(curve)
        collapse = f_plus <= COLLAPSE_F and interior_max >= COLLAPSE_INTERIOR
        records.append(ExhaustRecord(n, curve, [p.lo for p in curve.points], [p.hi for p in curve.points],
                                     fs, regions, sr.alpha_minus, sr.alpha_plus, f_plus, interior_max,
                                     rho, collapse, kink, jump))
        warnings.extend(f"n={n}: {w}" for w in curve.warnings)
    last = records[-1]
    t_inc = []
    f_inc = []
    for r, s in zip(records, records[1:]):
        dt = [abs(p.mid - q.mid) for p, q in zip(r.curve.points, last.curve.points)
              if p.is_finite and q.is_finite]
        t_inc.append(max(dt) if dt else math.nan)
        df = [abs(a - b) for a, b in zip(r.f, s.f) if math.isfinite(a) and math.isfinite(b)]
        f_inc.append(max(df) if df else math.nan)
    return ConvergenceReport(
        sys.label, psi.label, betas, alphas, records, t_inc, f_inc,
        all(r.boundary_collapse for r in records),
        _escaping(ns, [r.alpha_plus for r in records]),
        any(r.kink for r in records),
        regular_certificate_exhausting(sys, psi), pol, tol, warnings)
