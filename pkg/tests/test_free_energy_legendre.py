import math

import numpy as np
import pytest

from mfs.free_energy import FreeEnergyCurve, free_energy_at, free_energy_curve, slopes
from mfs.legendre import BOUNDARY, INTERIOR, biconjugate_gap, conjugate, lower_hull, spectrum
from mfs.potential import constant, neg_identity, neg_two_log
from mfs.system import finite, gauss, lueroth

import oracles

HALF = finite([0.5, 0.5])
PSI_HALF = constant(-math.log(2))


def test_closed_form_point():
    p = free_energy_at(HALF, PSI_HALF, 0.25)
    assert p.lo <= 0.75 <= p.hi and p.width <= 1e-3
    assert p.zero_exists


def test_closed_form_curve():
    c = free_energy_curve(HALF, PSI_HALF, [-1, 0, 1, 2])
    for p, v in zip(c.points, [2, 1, 0, -1]):
        assert p.lo - 1e-12 <= v <= p.hi + 1e-12


def test_lueroth_curve_domain():
    c = free_energy_curve(lueroth(), neg_identity(), [-0.5, 0, 1, 5])
    inf, zero, one, five = c.points
    assert inf.infinite
    assert zero.lo <= 1.0 <= zero.hi
    assert one.is_finite and five.is_finite
    assert c.dom_lo == 0.0 and c.dom_hi == math.inf


def test_lueroth_points_match_series_root():
    for beta in (0.5, 2.0):
        ref = oracles.series_free_energy(oracles.lueroth_ratio, lambda e: -e, beta, -3, 1)
        p = free_energy_at(lueroth(), neg_identity(), beta, tol=1e-6)
        assert p.lo - 1e-9 <= ref <= p.hi + 1e-9


def test_gauss_bowen_anchor():
    p = free_energy_at(gauss(), neg_two_log(), 0.0)
    assert p.lo <= 1.0 <= p.hi


def test_tol_must_be_positive():
    with pytest.raises(ValueError):
        free_energy_at(HALF, PSI_HALF, 0.0, tol=0.0)


def test_grid_must_increase():
    with pytest.raises(ValueError):
        free_energy_curve(HALF, PSI_HALF, [0, 0, 1])


def test_slopes_affine():
    c = FreeEnergyCurve.from_values(np.arange(-4, 5), 1 - np.arange(-4, 5))
    sr = slopes(c)
    assert np.allclose(sr.right[:-1], -1)
    assert sr.alpha_minus == pytest.approx(1) and sr.alpha_plus == pytest.approx(1)


def test_lueroth_alpha_minus_trend():
    c = free_energy_curve(lueroth(), neg_identity(), np.arange(0, 40.5, 1.0), tol=1e-5)
    assert slopes(c).alpha_minus == pytest.approx(2 / math.log(6), abs=5e-3)


def test_conjugate_affine_and_sentinel():
    c = FreeEnergyCurve.from_values(np.arange(-4, 5), 1 - np.arange(-4, 5))
    assert conjugate(c, 1.0).value == pytest.approx(1.0)
    s = conjugate(c, 1.5)
    assert s.value == -math.inf and s.diverging and s.at_edge


def test_conjugate_no_sentinel_at_domain_boundary():
    c = free_energy_curve(lueroth(), neg_identity(), [-0.5, 0.0, 1.0, 2.0])
    # the infimum sits at beta = 0, which bounds the domain: a true value
    r = conjugate(c, 3.0)
    assert math.isfinite(r.value) and r.beta == 0.0


def test_lueroth_conjugate_matches_fine_grid():
    c = free_energy_curve(lueroth(), neg_identity(), np.arange(0, 12.01, 0.5), tol=1e-6)
    fine = np.arange(0.5, 4.0, 0.1)
    ref = min(oracles.series_free_energy(oracles.lueroth_ratio, lambda e: -e, b, -8, 1.2, terms=120)
              + 1.3 * b for b in fine)
    val = conjugate(c, 1.3).value
    assert 0 < val < 1
    # the coarse grid can only overestimate the infimum
    assert ref - 1e-6 <= val <= ref + 1e-2


def test_spectrum_regions_and_clamp():
    c = free_energy_curve(HALF, PSI_HALF, np.arange(-2, 2.01, 0.5))
    sp = spectrum(c, [0.5, 1.0, 1.5])
    assert [p.region for p in sp.points] == [BOUNDARY, BOUNDARY, BOUNDARY]
    two = finite([0.5, 0.25])
    c = free_energy_curve(two, constant(-1.0), np.arange(-4, 4.01, 0.5))
    sp = spectrum(c, [0.5, 1.0, 1.25, 1.6])
    assert [p.region for p in sp.points] == [BOUNDARY, INTERIOR, INTERIOR, BOUNDARY]
    assert sp.points[0].clamped and sp.points[0].value == 0.0
    assert not sp.anomalies


def test_gauss_spectrum_unimodal_interior():
    c = free_energy_curve(gauss(32), neg_two_log(), np.arange(-6, 3.01, 0.5))
    sp = spectrum(c, [0.3, 0.5, 0.7])
    vals = [p.value for p in sp.points]
    assert all(0 < v < 1 for v in vals)
    assert all(p.region == INTERIOR for p in sp.points)


def test_biconjugate_examples():
    b = np.arange(-4, 5.0)
    assert biconjugate_gap(FreeEnergyCurve.from_values(b, 1 - b)) <= 1e-12
    v = 1 - b
    v[4] += 0.1
    assert biconjugate_gap(FreeEnergyCurve.from_values(b, v)) == pytest.approx(0.1, abs=1e-12)
    c = free_energy_curve(lueroth(), neg_identity(), np.arange(0, 10.5, 1.0))
    assert biconjugate_gap(c) <= 2 * c.max_width


def test_lower_hull_is_minorant():
    rng = np.random.default_rng(3)
    b = np.sort(rng.uniform(-5, 5, 30))
    m = rng.normal(size=30)
    h = lower_hull(b, m)
    assert np.all(h <= m + 1e-12)
    assert np.all(np.diff(np.diff(h) / np.diff(b)) >= -1e-9)
