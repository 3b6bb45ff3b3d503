"""
Fields in log-radial coordinates
================================

A function on R^n is stored on a uniform grid in s = ln r times a
quadrature rule on the sphere.  Integrals over R^n become sums in s.
"""

# %%
import numpy as np

from mellinlab.core_fields import (
    LogRadialGrid,
    apply_L,
    dilate,
    phi_forward,
    sample_field,
    spherical_mean,
)
from mellinlab.norms import lp_norm_rn

grid = LogRadialGrid(-12, 12, 2048)
f = sample_field(lambda r, w: np.exp(-r ** 2 / 2) + 0 * w[..., 0], grid, n=3, order=2)
print(f.grid, f.sphere.kind, f.sphere.size, "nodes")

# %%
# ||f||^2 for the Gaussian in three dimensions is pi^{3/2}
print("||f||^2      ", lp_norm_rn(f, 2) ** 2)
print("pi^{3/2}     ", np.pi ** 1.5)

# %%
# L = x . grad acts as d/ds on the radial variable; ||Lf||^2 / ||f||^2 = 15/4
Lf = apply_L(f)
print("||Lf||^2/||f||^2", lp_norm_rn(Lf, 2) ** 2 / lp_norm_rn(f, 2) ** 2)

# %%
# Phi moves f to the cylinder R x S^{n-1}; its spherical mean is a function of s
G = spherical_mean(phi_forward(f))
print("peak of the mean profile at s =", grid.s[np.argmax(np.abs(G.values))])

# %%
# dilations are unitary: U(t)f = e^{tn/2} f(e^t x) keeps the L^2 norm
for t in (-1.0, 0.5, 2.0):
    print(f"t = {t:+.1f}  ||U(t)f|| / ||f|| = {lp_norm_rn(dilate(f, t), 2) / lp_norm_rn(f, 2):.12f}")
