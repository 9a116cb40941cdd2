# %% [markdown]
# # Riesz transforms on the torus
#
# For a single Fourier mode the transform is multiplication by
# `k_i k_j / |k|^2`, which gives an exact check.

# %%
import numpy as np

from epct import ScalarField2D, riesz_apply

h = ScalarField2D.from_function(lambda x, y: np.cos(2 * x + 3 * y), 64)
out = riesz_apply(h, 1, 2)
expected = (2 * 3 / 13) * h.values
print("max error:", np.max(np.abs(out.values - expected)))

# %% [markdown]
# The trace `R11 + R22` is the identity on mean-zero fields.

# %%
rng = np.random.default_rng(0)
g = rng.normal(size=(32, 32))
g = ScalarField2D(g - g.mean())
print("trace error:", np.max(np.abs(riesz_apply(g, 1, 1).values + riesz_apply(g, 2, 2).values - g.values)))
