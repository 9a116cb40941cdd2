# %% [markdown]
# # Checking the geometric inequalities
#
# Each inequality is sampled on a log-spaced grid of `x` from 0 to 1000. The
# reported margin is `(lhs - rhs) / max(|lhs|, |rhs|)`, so a positive worst
# margin means the inequality held everywhere on the grid.
#
# One of the four checks (`5.1`, the discriminant sign for the exponential
# law) fails for every admissible set of constants. The library reports
# this honestly instead of hiding it.

# %%
from epct import find_feasible_params, verify_lemma

poly = find_feasible_params("poly", budget=2000)
exp = find_feasible_params("exp", budget=2000)

for lemma, params in (("4.1", poly), ("4.2", poly), ("5.1", exp), ("5.2", exp)):
    rep = verify_lemma(lemma, params)
    print(f"{lemma}: pass={rep.passed} worst margin {rep.worst_margin:+.3e} at x = {rep.worst_x:.3g}")
