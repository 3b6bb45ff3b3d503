"""
Mellin diagonalization
======================

After the change of variables the Mellin transform is a Fourier transform in
s.  Dilations become phases, the generator A becomes multiplication by tau,
and the semigroup becomes exp(-t tau^2).  The checks below measure each
statement on the resolved band of frequencies.
"""

# %%
import numpy as np

from mellinlab.core_fields import sample_log_field
from mellinlab.mellin import (
    check_dilation_shift,
    check_generator,
    check_generator_squared,
    check_semigroup,
    mellin_forward,
    parseval_defect,
)

f = sample_log_field(lambda s, w: np.exp(-s ** 2 / 2) * (1 + 0.5 * w[..., -1]), n=3, order=4)

# %%
print("Parseval defect       ", parseval_defect(f))
for name, dev in [("dilation shift", check_dilation_shift(f, 0.5)),
                  ("generator", check_generator(f)),
                  ("generator squared", check_generator_squared(f)),
                  ("semigroup", check_semigroup(f, 0.5))]:
    print(f"{name:<22}{dev.relative:.2e}")

# %%
d = mellin_forward(f)
k = np.argmax(np.abs(d.values[:, 0]))
print("spectral peak at |tau| =", abs(d.frequencies[k]))
