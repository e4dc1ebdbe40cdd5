# %% [markdown]
# # Choosing the partition
#
# For N servers and collusion level l the rate r_A r_B / Q is maximized
# over all pairs with Q <= N. The closed-form estimate lands on the
# optimum for almost every l; where it misses, the loss is tiny.

# %%
from fractions import Fraction

from aligned_smm.partition import (
    exhaustive_rate_opt,
    exhaustive_threshold_opt,
    gap_sweep,
    rate_sweep,
    theorem1_estimate,
    theorem2_estimate,
)

# %%
for ell in (1, 10, 100, 499):
    opt = exhaustive_rate_opt(1000, ell)
    est = theorem1_estimate(1000, ell)
    print(f"l={ell:3d}  optimum ({opt.r_A},{opt.r_B}) R={float(opt.rate):.4f}"
          f"  estimate ({est.r_A},{est.r_B}) R={float(est.rate):.4f}")

# %% [markdown]
# ## How far off is the estimate?

# %%
for N in (100, 500, 1000, 2000):
    sweep = gap_sweep(N)
    print(f"N={N:4d}  max gap {float(sweep.max_gap):.2e}  "
          f"suboptimal for {sweep.suboptimal_count} of {len(sweep.rows)} values of l")

# %% [markdown]
# ## Rate against the one-sided bound and the equal split

# %%
rows = rate_sweep(100)
for r in rows[::7]:
    print(f"l={r.ell:2d}  optimum {float(r.exhaustive.rate):.3f}  equal split "
          f"{float(r.equal.rate):.3f}  one-sided bound {float(r.one_sided_bound):.3f}")

# %% [markdown]
# ## Fewest servers for a rate floor
#
# Asking for a minimum rate instead of the maximum rate leaves room for
# more stragglers.

# %%
for R in (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)):
    opt = exhaustive_threshold_opt(100, 2, R)
    est = theorem2_estimate(100, 2, R)
    print(f"R >= {R}: optimum Q={opt.Q} ({opt.r_A},{opt.r_B}), estimate Q={est.Q}")
