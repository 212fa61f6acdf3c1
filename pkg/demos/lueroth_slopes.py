"""Spectrum endpoints from slopes of the free energy.

For self-similar systems with the potential psi(e) = -e the free energy is
the root of an explicit series, and the spectrum endpoints are limits of
slopes. The left endpoint of the Lueroth system is 2/log 6. For the
generalized Lueroth system with ratios 4/(e(e+1)(e+2)), truncations have a
right endpoint set by whichever symbol maximises e/log(e(e+1)(e+2)/4); that
is symbol 1 until n reaches about 19, and symbol n afterwards.

Run: python3 demos/lueroth_slopes.py   (about two minutes)
"""

# %%
import math

import numpy as np

from mfs import exhaust_run, free_energy_curve, generalized_lueroth, lueroth, neg_identity, slopes

# %%
betas = [-0.5] + list(np.arange(0, 60.01, 1.0))
c = free_energy_curve(lueroth(), neg_identity(), betas, tol=1e-5)
sr = slopes(c)
print(f"Lueroth: domain starts at beta = {c.dom_lo}, alpha_- = {sr.alpha_minus:.6f}, "
      f"2/log 6 = {2 / math.log(6):.6f}")

# %%
betas += list(np.arange(80, 300.1, 20))
c = free_energy_curve(generalized_lueroth(), neg_identity(), betas, tol=1e-5)
print(f"generalized Lueroth: alpha_- = {slopes(c).alpha_minus:.6f}, 3/log 15 = {3 / math.log(15):.6f}")

# %% [markdown]
# Which symbol sets the right endpoint of the truncation to {1..n}?

# %%
ratio = [e / math.log(e * (e + 1) * (e + 2) / 4) for e in range(1, 26)]
switch = next(n for n in range(2, 26) if ratio[n - 1] > ratio[0])
print(f"e / log(e(e+1)(e+2)/4): e=1 -> {ratio[0]:.4f}; symbol n first wins at n = {switch}")

rep = exhaust_run(generalized_lueroth(), neg_identity(), [3, 5, 10, 20, 40, 80],
                  list(np.arange(-60, 5.01, 1.0)), [1.2, 1.3], tol=1e-5)
print("\n  n   alpha_+^n   n/log(n(n+1)(n+2)/4)")
for r in rep.records:
    n = r.n
    print(f"{n:3d}   {r.alpha_plus:.4f}     {n / math.log(n * (n + 1) * (n + 2) / 4):.4f}")
print("escaping boundary:", rep.escaping_boundary, " kink:", rep.kink)
