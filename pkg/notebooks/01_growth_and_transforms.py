# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Growth functions and their transforms
#
# A growth function is stored through `log u`.  Everything below works in the
# log domain, so values like `u(r) = exp(r)` at `r = 500` stay finite.

# %%
import math

import numpy as np

from cksgrowth import catalog_lookup, parse_growth_spec
from cksgrowth.growth import check_U_condition
from cksgrowth.transforms import dual_legendre, l_function, legendre, weight_sequence

u = catalog_lookup("exp")
k = parse_growth_spec("kondratiev:beta=0.5")
print(u.label, k.label)

# %% [markdown]
# The power-scale infimum `inf_r u(r) / r^t` for `exp` has minimizer `r = t`,
# which gives `(e/t)^t`.  The numeric path never sees that formula.

# %%
t = np.array([0.5, 1.0, 2.0, 10.0, 40.0])
numeric = legendre(u, t, method="numeric")
print(np.c_[t, numeric, t * (1 - np.log(t))])

# %% [markdown]
# The dual transform of `exp` is `exp` again; for the Kondratiev family it is
# a slower-growing exponential of a power.

# %%
r = np.linspace(0, 20, 5)
print(dual_legendre(u, r, method="numeric") - r)
print(dual_legendre(k, r, method="numeric"), 0.5 * r ** 2)

# %% [markdown]
# The series `L_u(r) = sum l_u(n) r^n` rebuilds something comparable to `u`.
# For `exp` at `r = 1` the sum is about 6.58.

# %%
print(math.exp(l_function(u, 1.0)))
ws = weight_sequence(u, 6)
print(ws.alpha)

# %% [markdown]
# Condition checks are grid-based.  A report carries a verdict, a witness
# when something fails, and the grid it used.

# %%
for which in ("U0", "U1", "U2", "U3"):
    rep = check_U_condition(k, which)
    print(which, rep.verdict)
