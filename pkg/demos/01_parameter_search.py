# %% [markdown]
# # Searching for threshold constants
#
# The threshold line `d = m* rho - n*` is built from six constants. A search
# looks for a valid set that makes the slope `m*` small, because a gentler
# line leaves more initial data inside the global-existence region.

# %%
from epct import find_feasible_params, make_threshold_params

for envelope in ("poly", "exp"):
    result = find_feasible_params(envelope, s=1.0, budget=2000, seed=0, return_result=True)
    p = result.params
    print(f"{envelope}: m* = {p.m_star:.4g}, n* = {p.n_star:.4g} after {result.evaluations} evaluations")

# %% [markdown]
# Constants outside the admissible set are rejected with a list of the
# conditions they break.

# %%
from epct import ValidationError

try:
    make_threshold_params(m1=1.0, m2=2.0, n1=1.0, n2=1.5, M=2.0, N=0.5, envelope="poly")
except ValidationError as err:
    print(err)
