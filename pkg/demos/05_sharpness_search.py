"""
Sharpness and empirical constants
=================================

Nelder-Mead over a parametrized family pushes ratios toward their extreme
values.  For the dilation Hardy bound the ratio tends to 1 along wide
log-Gaussians; for bounds with unspecified constants the search gives a
lower bound on the best constant.
"""

# %%
import math

from mellinlab.extremal import estimate_constant, optimize
from mellinlab.trials import annulus_bump_family, log_gaussian_family, sobolev_bubble_family

for n, p in [(1, 1.0), (3, 2.0), (5, 3.0)]:
    res = optimize("hardy_dilation", log_gaussian_family(n, p), "minimize", 200, {"p": p})
    print(f"n={n} p={p}: ratio {res.best_ratio:.5f} at sigma {res.best_params['sigma']:.1f}"
          f" after {res.evaluations} evaluations")

# %%
# the Sobolev bubble is extremal for the delta = 0 case of the Hardy-remainder bound
res = optimize("stubbe", sobolev_bubble_family(3), "maximize", 50, {"delta": 0.0})
print("bubble ratio", res.best_ratio)

# %%
C, _ = estimate_constant("main_p2", [log_gaussian_family(3)], budget=100)
print("main_p2 empirical constant >=", C)

# %%
# annulus bound: the constant-free ratio grows like (ln R)^{4/3} in three dimensions
for L in (2, 4, 8, 16):
    C, _ = estimate_constant("annulus_L", [annulus_bump_family(3, L)], budget=60,
                             params={"R": math.exp(L)})
    print(f"ln R = {L:>2}: sup ratio / (ln R)^(4/3) = {C:.6f}")
