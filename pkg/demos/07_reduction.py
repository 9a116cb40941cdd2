# %% [markdown]
# # The reduction along particle paths
#
# A small periodic flow is evolved spectrally. Along traced characteristics,
# the vorticity over density should be conserved, the strain should match
# the integrated forcings, and `d' = -d^2/2 + A rho^2 - (rho - 1)` should
# hold with `A(t)` rebuilt from the trace.

# %%
from epct.pde import verify_flow

for n in (64, 128):
    report, traces = verify_flow(n=n, t_end=0.3)
    print(n, {k: f"{v:.2e}" for k, v in report.to_dict().items() if k.endswith("_rel")})
