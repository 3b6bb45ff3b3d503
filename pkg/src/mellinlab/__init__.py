"""Log-polar numerics for Hardy-Sobolev type inequalities: the cylinder map,
the dilation semigroup, the Mellin diagonalization, a certifier for the
inequality registry and extremal searches over trial families."""

from . import core_fields, extremal, inequalities, mellin, norms, semigroup, trials

__version__ = "0.1.0"

__all__ = ["core_fields", "semigroup", "mellin", "norms", "inequalities", "trials", "extremal"]
