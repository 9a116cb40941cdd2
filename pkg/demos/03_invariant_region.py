# %% [markdown]
# # The auxiliary system keeps its region
#
# Starting points are drawn inside `{a > 0, b > 0, b > m* a - n*}`. Each
# trajectory of the auxiliary system should reach the final time with
# `b > 0` and `a` never rising above its start.

# %%
import numpy as np

from epct import find_feasible_params
from epct.dynamics import invariant_trial, sample_region

params = find_feasible_params("poly", budget=2000)
a0s, b0s = sample_region(params, np.random.default_rng(1), 20)
trials = [invariant_trial(a0, b0, "poly", t_end=20.0) for a0, b0 in zip(a0s, b0s)]
print("held:", sum(t.held for t in trials), "of", len(trials))
print("smallest b seen:", min(t.b_min for t in trials))
