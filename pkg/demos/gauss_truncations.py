"""Continued fractions with bounded digits.

Restricting the Gauss system to digits {1..n} gives a finite system whose
spectrum of the geometric potential vanishes at the right endpoint. The full
system does not: its free energy is finite only for t > 1/2, and the spectrum
near alpha = 1 stays well above zero. This script walks through both.

Run: python3 demos/gauss_truncations.py   (about a minute)
"""

# %%
import math

import numpy as np

from mfs import exhaust_run, free_energy_at, gauss, neg_two_log

# %% [markdown]
# The Hausdorff dimension is t(0): 1 for the full system.

# %%
p = free_energy_at(gauss(), neg_two_log(), 0.0)
print(f"t(0) for all digits:       [{p.lo:.5f}, {p.hi:.5f}]")
p = free_energy_at(gauss(2), neg_two_log(), 0.0, tol=1e-5)
print(f"t(0) for digits {{1, 2}}:    [{p.lo:.5f}, {p.hi:.5f}]")

# %% [markdown]
# Right endpoints alpha_+^n of the truncated spectra. The largest local
# exponent belongs to the fixed point of x -> 1/(n + x), so the endpoint is
# -log n / log x_n. Recovering it from slopes of t_n needs very negative beta.

# %%
betas = [-600, -400, -200, -100, -50, -25, -12, -5, -2, -1, 0, 0.5, 1, 2, 3]
rep = exhaust_run(gauss(), neg_two_log(), [2, 3, 5, 8], betas, [0.3, 0.5, 0.7])
print("\n  n   alpha_+^n   closed form   f_n(alpha_+^n)   max interior f_n")
for r in rep.records:
    n = r.n
    closed = -math.log(n) / math.log(-n / 2 + math.sqrt(n * n / 4 + 1))
    print(f"{n:3d}   {r.alpha_plus:.6f}    {closed:.6f}      {r.f_at_alpha_plus:8.4f}        {r.interior_max:.4f}")
print("boundary collapse flag:", rep.boundary_collapse)

# %% [markdown]
# With more digits the interior values near alpha = 1 approach those of the
# full system, while f_n(alpha_+^n) stays 0: the limit of the endpoints is not
# the endpoint value of the limit.

# %%
rep = exhaust_run(gauss(), neg_two_log(), [32], list(np.arange(-20, 3.01, 0.5)), [0.9, 0.95, 0.98])
r = rep.records[0]
for a, f, reg in zip(rep.alphas, r.f, r.f_regions):
    print(f"n = 32: f({a}) = {f:.4f}  [{reg}]")
