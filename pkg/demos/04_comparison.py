# %% [markdown]
# # Comparing the reduced and auxiliary systems
#
# If `b0 < d0` and `rho0 < a0`, the auxiliary solution bounds the reduced one
# from below in `d` and from above in `rho` for every admissible `A(t)`.
# Both systems are integrated with one step controller.

# %%
from epct import AdmissibleFamily, EnvelopeSpec, run_comparison

env = EnvelopeSpec("poly", 1.0, upper=0.5)
family = AdmissibleFamily(env, seed=0)
for i in range(5):
    rep = run_comparison(0.5, 1.0, 0.6, 0.9, family.member(i), t_end=20.0)
    print(i, rep.ordering_held, f"{rep.min_gap_d_minus_b:.3g}", f"{rep.min_gap_a_minus_rho:.3g}")
