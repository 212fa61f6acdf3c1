import math

import numpy as np
import pytest

from mfs.laws import BudgetError
from mfs.potential import WeightedPotential, constant, neg_identity, neg_two_log
from mfs.pressure import (DepthPolicy, PressureValue, Sign, exact_series_pressure, partition_bounds,
                          pressure, pressure_sign, sign_of)
from mfs.series import Growth
from mfs.system import finite, gauss, generalized_lueroth, log_power, lueroth, power_law, truncate
from mfs.transfer import cylinder_graph, cylinder_transfer_bounds, lumped_groups, perron_bounds

import oracles


def wp(t, beta, sys, psi=None):
    return WeightedPotential(t, beta, sys, psi or constant(0.0))


# -- series ----------------------------------------------------------------------
@pytest.mark.parametrize("g, conv", [
    (Growth(1.0), True), (Growth(-1.0), False), (Growth(0, 2.0), True), (Growth(0, 1.0), False),
    (Growth(0, 1.0, 2.0), True), (Growth(0, 1.0, 1.0), False), (Growth(0, 0.5, 9.0), False),
])
def test_growth_classification(g, conv):
    assert g.converges() is conv


def test_lueroth_series_zero():
    p = exact_series_pressure(wp(1.0, 0.0, lueroth()))
    assert p.is_finite and p.lo <= 0.0 <= p.hi
    assert p.width < 1e-6


def test_lueroth_negid_diverges_for_negative_beta():
    for t in (0.5, 1.0, 5.0):
        assert pressure(wp(t, -0.1, lueroth(), neg_identity())).is_infinite


def test_finite_closed_form():
    p = pressure(wp(1.0, 1.0, finite([0.5, 0.5]), constant(-math.log(2))))
    assert p.lo <= -math.log(2) <= p.hi and p.width < 1e-9


def test_partition_bounds_finite_exact():
    pb = partition_bounds(wp(1.0, 0.0, finite([0.5, 0.5])), 3, 10)
    assert pb.lo <= 0.0 <= pb.hi and pb.width < 1e-14


def test_partition_bounds_lueroth_with_tail():
    pb = partition_bounds(wp(1.0, 0.0, lueroth()), 1, 10_000)
    assert pb.lo <= 0.0 <= pb.hi and pb.width < 1e-3


def test_partition_bounds_gauss2_depth4():
    pb = partition_bounds(wp(1.0, 0.0, gauss(2)), 4, 10)
    exact_ish = oracles.gauss_log_z(2, 12, 1.0)
    assert pb.width <= 0.25 * math.log(4)
    assert pb.lo <= exact_ish[1] / 12 + 1e-12
    assert pb.hi >= exact_ish[0] / 12 - 1e-12


def test_partition_budget():
    with pytest.raises(BudgetError):
        partition_bounds(wp(1.0, 0.0, gauss(50)), 6, 50, budget=1000)


def test_gauss_bowen_pressure_contains_zero():
    p = pressure(wp(1.0, 0.0, gauss(), neg_two_log()))
    assert p.lo <= 0.0 <= p.hi
    assert p.width <= 1e-3


def test_gauss_small_t_diverges():
    assert pressure(wp(0.2, 0.0, gauss(), neg_two_log())).is_infinite


@pytest.mark.parametrize("sys", [gauss(3), lueroth(), finite([0.3, 0.2]), log_power(0.05)])
def test_huge_t_negative(sys):
    p = pressure(wp(1000.0, 0.0, sys))
    assert p.is_finite and p.hi < 0


def test_pressure_sign_examples():
    assert pressure_sign(wp(1.5, 0.0, lueroth())) is Sign.NEGATIVE
    assert pressure_sign(wp(0.4, 0.0, lueroth())) is Sign.POSITIVE
    assert pressure_sign(wp(1.0, 0.0, finite([0.5, 0.5]))) is Sign.STRADDLING


def test_sign_of_values():
    assert sign_of(PressureValue.infinite()) is Sign.POSITIVE
    assert sign_of(PressureValue.indeterminate(-1.0)) is Sign.STRADDLING
    assert sign_of(PressureValue("finite", -2.0, -1.0)) is Sign.NEGATIVE


def test_powerlaw_series_matches_mpmath():
    # r_e = a e^{-p}: P(t) = log(a^t zeta(p t))
    import mpmath as mp
    a, p_, t = 0.5, 2.0, 0.8
    exact = float(t * mp.log(a) + mp.log(mp.zeta(p_ * t)))
    pv = exact_series_pressure(wp(t, 0.0, power_law(a, p_)), eps=1e-8)
    assert pv.lo <= exact <= pv.hi


def test_glueroth_series_matches_mpmath():
    import mpmath as mp
    t, beta = 0.7, 0.5
    z = mp.nsum(lambda e: oracles.glueroth_ratio(e) ** t * mp.e ** (-beta * e), [1, mp.inf])
    pv = exact_series_pressure(wp(t, beta, generalized_lueroth(), neg_identity()), eps=1e-9)
    assert pv.lo <= float(mp.log(z)) <= pv.hi


def test_truncated_series_is_finite_sum():
    s = truncate(lueroth(), 3)
    exact = math.log(1 / 2 + 1 / 6 + 1 / 12)
    pv = pressure(wp(1.0, 0.0, s))
    assert pv.lo <= exact <= pv.hi


# -- cylinder transfer bounds --------------------------------------------------------
def test_lumped_groups_cover_tail():
    starts, ends = lumped_groups(gauss(), 64, 1 / 64)
    assert starts[0] == 65 and ends[-1] == 0
    assert all(e + 1 == s for e, s in zip(ends[:-1], starts[1:]))


def test_cylinder_graph_budget():
    with pytest.raises(BudgetError):
        cylinder_graph(gauss(), 64, 1e-7, 1000)


def test_transfer_bounds_refine():
    w = wp(0.8, 0.0, gauss(), neg_two_log())
    coarse = cylinder_transfer_bounds(w, 1 / 64)
    fine = cylinder_transfer_bounds(w, 1 / 1024)
    assert fine.width < coarse.width
    assert fine.intersects(coarse)


def test_perron_bounds_small_matrix():
    from scipy import sparse
    m = sparse.csr_matrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
    lo, hi, _ = perron_bounds(m)
    rho = (5 + math.sqrt(33)) / 2
    assert lo <= rho <= hi and hi - lo < 1e-8


def test_truncated_gauss_pressure_agrees_with_oracle():
    t = 0.6
    lo, hi = oracles.gauss_log_z(3, 9, t)
    p = pressure(wp(t, 0.0, gauss(3), neg_two_log()), DepthPolicy(target_width=1e-4))
    # (1/n) log Z_n^inf <= P <= (1/n) log Z_n^sup
    assert lo / 9 - 1e-12 <= p.hi and p.lo <= hi / 9 + 1e-12
    assert p.width <= 1e-4


def test_depth_policy_validation():
    with pytest.raises(ValueError):
        DepthPolicy(max_depth=0)
    assert DepthPolicy().refined(4).target_width == pytest.approx(2.5e-4)
