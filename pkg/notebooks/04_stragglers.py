# %% [markdown]
# # Stragglers on a simulated clock
#
# Servers finish at simulated ticks; the user decodes from the first Q
# answers. Fewer exploited servers means an earlier Q-th arrival.

# %%
from aligned_smm import FieldMatrix, Partition, SchemeParams
from aligned_smm.simulator import StragglerConfig, run_simulation, threshold_experiment

# %%
A = FieldMatrix.random(4, 3, rng=0)
B = FieldMatrix.random(3, 2, rng=1)
params = SchemeParams(6, 1)
part = Partition(2, 1)  # Q = 5
for slow in [(1,), (1, 2)]:
    rep = run_simulation(A, B, part, params, StragglerConfig("fixed_slow_set", slow_set=slow))
    print(slow, rep.to_json())

# %% [markdown]
# ## Rate-optimal against threshold-optimal partitions
#
# Both partitions replay the same exponential delay draws in every trial.

# %%
summary = threshold_experiment(40, 2, "1/3", StragglerConfig("exponential", mean=1.0),
                               trials=300, seed=0)
print(summary.to_dict())
