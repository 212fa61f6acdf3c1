"""A free energy that turns flat.

Take ratios r_e = a / ((e+2) log(e+2)^2) and the constant potential -1. The
series sum r_e^t converges exactly for t >= 1, so the pressure equation has
no root once beta passes eta = log sum r_e; from there on t(beta) = 1. The
spectrum is affine on the matching range of small alpha.

Run: python3 demos/flat_free_energy.py   (about fifteen seconds)
"""

# %%
import math

import numpy as np

from mfs import constant, free_energy_curve, log_power, slopes, spectrum

a = 0.05
c = free_energy_curve(log_power(a), constant(-1.0), np.arange(-8, 4.01, 0.25))
sr = slopes(c)

# %%
for p in c.points[::4]:
    print(f"beta = {p.beta:6.2f}   t in [{p.lo:.5f}, {p.hi:.5f}]   root found: {p.zero_exists}")
print(f"\nflat from beta = {sr.flat_from}, entry slope gives alpha = {sr.alpha_kink:.4f}")

# %% [markdown]
# On (0, alpha_kink) the conjugate's infimum sits at the start of the flat
# part, so f(alpha) = 1 + beta_flat * alpha is a line.

# %%
alphas = np.linspace(0.01, sr.alpha_kink, 6)
sp = spectrum(c, alphas)
for x, p in zip(alphas, sp.points):
    print(f"f({x:.4f}) = {p.value:.5f}   line: {1 + sr.flat_from * x:.5f}")
print(f"\ncheck: log(a * sum_k>=3 1/(k log^2 k)) should sit within one grid step below beta = {sr.flat_from}")
