"""
Certifying the inequality registry
==================================

Every entry evaluates its two sides on a field and returns a record with a
ratio, a signed margin (non-negative when the bound holds) and a verdict.
Entries with a named constant get "holds" or "violated"; entries whose
constant is only known to exist are "reported" with the empirical ratio.
"""

# %%
from collections import Counter

from mellinlab.inequalities import certify, certify_suite, registry
from mellinlab.trials import random_trials

for e in registry():
    print(f"{e.id:<20} {e.constant_text}")

# %%
trials = random_trials("bump_mixture", 5, seed=0, n=3)
records = certify_suite([e.id for e in registry()], trials)
print(Counter(r.verdict for r in records))

# %%
f = trials[0].build()
for p in (1.0, 2.0, 3.0):
    rec = certify("hardy_dilation", f, {"p": p})
    print(f"p = {p}: lhs {rec.lhs:.4g} rhs {rec.rhs:.4g} ratio {rec.ratio:.4f} {rec.verdict}")

# %%
# the weak-type bound: the constant with |S^{n-1}|^{-1} fails, the one with |S^{n-1}|^{-1/q} holds
rec = certify("main_weak", f, {"p": 1, "q": 3})
print(rec.verdict, "derived margin", rec.params["derived_margin"])
