"""Acceptance criteria, one test (or group) per criterion.

Each test records ``(passed, detail)`` in ``conftest.ACCEPTANCE`` before
asserting, so the terminal summary prints one PASS/FAIL line per criterion
even when a criterion fails.
"""

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE
from mfs import cli
from mfs.exhaust import exhaust_run, rho_distance
from mfs.free_energy import free_energy_at, free_energy_curve, slopes
from mfs.legendre import conjugate
from mfs.potential import constant, neg_identity, neg_two_log
from mfs.pressure import DepthPolicy
from mfs.system import gauss, generalized_lueroth, log_power, lueroth, truncate

HERE = Path(__file__).parent

# wide negative range: the top slope of t_n for n = 8 settles only near beta = -600
GAUSS_BETAS = [-600, -500, -400, -300, -200, -150, -100, -70, -50, -35, -25, -18, -12, -8, -5, -3,
               -2, -1, 0, 0.5, 1, 1.5, 2, 3]


def record(k, ok, detail):
    prev = ACCEPTANCE.get(k)
    if prev is not None:
        ok, detail = prev[0] and ok, f"{prev[1]}; {detail}"
    ACCEPTANCE[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


# 1 ---------------------------------------------------------------------------
def test_c1_bowen_anchor_via_cli(tmp_path):
    out = tmp_path / "fe.json"
    t0 = time.perf_counter()
    code = cli.main(["free-energy", "--system", "gauss", "--psi", "neg2log", "--beta", "0",
                     "--max-depth", "6", "--symbol-cap", "4096", "--format", "json", "-o", str(out)])
    elapsed = time.perf_counter() - t0
    pt = json.loads(out.read_text())["points"][0]
    ok = code == 0 and pt["t_lo"] <= 1.02 and pt["t_hi"] >= 0.98 and elapsed < 60
    record(1, ok, f"t(0) in [{pt['t_lo']:.6f}, {pt['t_hi']:.6f}], {elapsed:.1f}s")
    assert ok


# 2 ---------------------------------------------------------------------------
def test_c2_truncated_gauss_dimension():
    t0 = time.perf_counter()
    ref = oracles.truncated_gauss_dimension(2, 10)
    p = free_energy_at(gauss(2), neg_two_log(), 0.0, tol=1e-4)
    elapsed = time.perf_counter() - t0
    # the oracle's certified bracket must also hold the computed enclosure
    ok = (abs(p.mid - ref["ratio"]) <= 0.01 and ref["lower"] <= p.lo and p.hi <= ref["upper"]
          and elapsed < 60)
    record(2, ok, f"t_2(0) = {p.mid:.6f} vs oracle {ref['ratio']:.6f}, {elapsed:.1f}s")
    assert ok


# 3 ---------------------------------------------------------------------------
def test_c3_lueroth_alpha_minus():
    t0 = time.perf_counter()
    c = free_energy_curve(lueroth(), neg_identity(), [-0.5] + list(np.arange(0, 60.01, 1.0)), tol=1e-5)
    am = slopes(c).alpha_minus
    elapsed = time.perf_counter() - t0
    target = 2 / math.log(6)
    ok = abs(am - target) <= 1e-3 and elapsed < 30
    record(3, ok, f"Lueroth alpha_- = {am:.6f} vs {target:.6f}, {elapsed:.1f}s")
    assert ok


def test_c3_generalized_lueroth_alpha_minus():
    t0 = time.perf_counter()
    grid = [-0.5] + list(np.arange(0, 60.01, 1.0)) + list(np.arange(80, 300.1, 20))
    c = free_energy_curve(generalized_lueroth(), neg_identity(), grid, tol=1e-5)
    am = slopes(c).alpha_minus
    elapsed = time.perf_counter() - t0
    target = 3 / math.log(15)
    ok = abs(am - target) <= 1e-3 and elapsed < 30
    record(3, ok, f"generalized Lueroth alpha_- = {am:.6f} vs {target:.6f}, {elapsed:.1f}s")
    assert ok


# 4 and 6 -----------------------------------------------------------------------
@pytest.fixture(scope="module")
def gauss_report():
    t0 = time.perf_counter()
    rep = exhaust_run(gauss(), neg_two_log(), [2, 3, 5, 8], GAUSS_BETAS, [0.3, 0.5, 0.6, 0.7])
    return rep, time.perf_counter() - t0


def test_c4_gauss_alpha_plus(gauss_report):
    rep, elapsed = gauss_report
    errs = {r.n: r.alpha_plus - oracles.gauss_alpha_plus(r.n) for r in rep.records if r.n in (2, 3, 5)}
    ok = all(abs(e) <= 0.02 for e in errs.values()) and elapsed < 300
    record(4, ok, "alpha_+^n errors " + ", ".join(f"n={n}: {e:+.2e}" for n, e in errs.items())
           + f", {elapsed:.1f}s (with n=8)")
    assert ok


def test_c6_boundary_collapse(gauss_report):
    rep, _ = gauss_report
    recs = [r for r in rep.records if r.n in (3, 5, 8)]
    ok = all(r.boundary_collapse for r in recs)
    record(6, ok, "collapse " + ", ".join(
        f"n={r.n}: f(a+)={r.f_at_alpha_plus:.3f}, interior max {r.interior_max:.3f}" for r in recs))
    assert ok


def test_c6_interior_gap_large_n():
    rep = exhaust_run(gauss(), neg_two_log(), [32, 64], list(np.arange(-20, 3.01, 0.5)), [0.9, 0.95])
    best = []
    for r in rep.records:
        vals = [f for a, f, reg in zip(rep.alphas, r.f, r.f_regions) if a >= 0.9 and reg == "interior"]
        best.append((r.n, max(vals) if vals else -math.inf))
    ok = all(v > 0.3 for _, v in best)
    record(6, ok, "interior f at alpha >= 0.9: " + ", ".join(f"n={n}: {v:.3f}" for n, v in best))
    assert ok


# 5 ---------------------------------------------------------------------------
GLUE_BETAS = list(np.arange(-60, 5.01, 1.0))


@pytest.mark.xfail(strict=True, reason="symbol 1 dominates the top slope until n is about 19; "
                   "see the decisions ledger")
def test_c5_escaping_boundary_small_n():
    rep = exhaust_run(generalized_lueroth(), neg_identity(), [3, 5, 10], GLUE_BETAS, [1.2, 1.3], tol=1e-5)
    ap = rep.alpha_plus()
    target = [oracles.glueroth_alpha_plus_formula(n) for n in (3, 5, 10)]
    ok = all(abs(a - b) <= 0.01 for a, b in zip(ap, target)) and all(np.diff(ap) > 0)
    record(5, ok, "alpha_+^n " + ", ".join(f"{a:.4f} vs {b:.4f}" for a, b in zip(ap, target))
           + f"; top ratio at e=1 is {oracles.glueroth_symbol_ratio(1):.4f}")
    assert ok


def test_c5_escaping_regime_large_n():
    # not the criterion itself: the closed form does hold once symbol n dominates
    ns = [20, 40, 80]
    rep = exhaust_run(generalized_lueroth(), neg_identity(), ns, GLUE_BETAS, [1.2, 1.3], tol=1e-5)
    target = [oracles.glueroth_alpha_plus_formula(n) for n in ns]
    assert all(abs(a - b) <= 0.01 for a, b in zip(rep.alpha_plus(), target))
    assert rep.escaping_boundary
    print("escaping regime n=20,40,80:", rep.alpha_plus())


# 7 ---------------------------------------------------------------------------
def test_c7_irregular_flat_segment():
    delta, eta = oracles.logpower_flat(0.05)
    step, tol = 0.25, 1e-3
    c = free_energy_curve(log_power(0.05), constant(-1.0), np.arange(-8, 4.01, step), tol=tol)
    sr = slopes(c)
    flat = [p for p in c.points if sr.flat_from is not None and p.beta >= sr.flat_from]
    mids = [p.mid for p in flat]
    tail_ok = (len(flat) >= 2 and max(mids) - min(mids) <= tol and not any(p.zero_exists for p in flat)
               and all(p.lo - tol <= delta <= p.hi + tol for p in flat)
               and eta <= sr.flat_from < eta + step)
    # affine spectrum on (0, alpha_kink)
    a = np.linspace(0, sr.alpha_kink, 12)[1:-1]
    f = np.array([conjugate(c, x).value for x in a])
    chord = f[0] + (f[-1] - f[0]) * (a - a[0]) / (a[-1] - a[0])
    dev = float(np.max(np.abs(f - chord)))
    ok = tail_ok and dev < 1e-2
    record(7, ok, f"flat from beta = {sr.flat_from} (eta = {eta:.5f}), t = {np.mean(mids):.5f} "
                  f"(delta = {delta}), chord deviation {dev:.1e} on (0, {sr.alpha_kink:.4f})")
    assert ok


# 8 ---------------------------------------------------------------------------
def test_c8_rho_exactness():
    rows = []
    for sys in (gauss(), lueroth()):
        for n in (4, 8, 12):
            enc = rho_distance(sys, truncate(sys, n), n + 8)
            rows.append((sys.family, n, enc.contains(2.0 ** -n)))
    ok = all(r[2] for r in rows)
    record(8, ok, f"{sum(r[2] for r in rows)}/{len(rows)} enclosures contain 2^-n")
    assert ok


# 9 ---------------------------------------------------------------------------
def test_c9_property_suite():
    t0 = time.perf_counter()
    res = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                          str(HERE / "test_properties.py")], capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    ok = res.returncode == 0 and elapsed < 120
    record(9, ok, f"{res.stdout.strip().splitlines()[-1]} (wall {elapsed:.1f}s)")
    assert ok, res.stdout[-2000:]
