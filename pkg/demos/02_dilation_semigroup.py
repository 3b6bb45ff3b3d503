"""
The heat semigroup in log-radius
================================

In the variable s the semigroup is convolution with a Gaussian heat kernel.
Three independent evaluations are compared: direct quadrature, a zero-padded
FFT convolution and a Mellin multiplier exp(-t tau^2).
"""

# %%
import math

import numpy as np

from mellinlab.core_fields import LogRadialGrid, RadialProfile
from mellinlab.semigroup import METHODS, SemigroupQuery, evolve
from mellinlab.trials import random_profiles

grid = LogRadialGrid()
G = RadialProfile(grid, np.exp(-grid.s ** 2 / 2) + 0j)

# %%
# the Gaussian stays Gaussian: variance 1 + 2t, amplitude (1 + 2t)^{-1/2}
for t in (0.01, 0.1, 1.0):
    exact = np.exp(-grid.s ** 2 / (2 * (1 + 2 * t))) / math.sqrt(1 + 2 * t)
    errs = {m: np.max(np.abs(evolve(G, SemigroupQuery(t, m)).values - exact)) for m in METHODS}
    print(f"t = {t:<5}", "  ".join(f"{m}: {e:.1e}" for m, e in errs.items()))

# %%
# semigroup law on a random smooth profile
H = random_profiles(LogRadialGrid(-24, 24, 4096), 1, seed=1)[0]
twice = evolve(evolve(H, 0.3), 0.4).values
once = evolve(H, 0.7).values
print("P(0.4)P(0.3) - P(0.7):", np.max(np.abs(twice - once)))

# %%
# contraction: the sup norm never grows
print([round(float(np.max(np.abs(evolve(H, t).values))), 6) for t in (0.0001, 0.1, 1, 10)])
