# %% [markdown]
# # Sweeping initial data
#
# A coarse `(rho0, d0)` grid is classified as global, blow-up or undecided.
# Inside the threshold region every run should be global and should respect
# the a priori divergence bound.

# %%
import collections

import numpy as np

from epct import AdmissibleFamily, EnvelopeSpec, find_feasible_params, sweep_classify
from epct.thresholds import ThresholdRegion

params = find_feasible_params("poly", budget=2000)
region = ThresholdRegion.from_params(params)
rhos = np.linspace(0.0, 2 * region.rho_intercept, 9)[1:]
ds = np.linspace(-2.0, 3.0, 8)
family = AdmissibleFamily(EnvelopeSpec("poly", 1.0, upper=0.5), seed=0)
rows = sweep_classify(region, rhos, ds, family, t_end=20.0, tol=1e-11)

print(collections.Counter((r.member, r.status.value) for r in rows))
print("bound held for all members:", all(r.bound_held() for r in rows if r.member))
