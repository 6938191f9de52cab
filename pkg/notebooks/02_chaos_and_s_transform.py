# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Chaos vectors and the S-transform
#
# A chaos vector is a finite set of symmetric kernels indexed by bidegree
# `(l, m)`.  Entries are stored once per sorted multi-index.

# %%
import numpy as np

from cksgrowth import chaos as C
from cksgrowth.analytic import (AnalyticFunction, check_growth_condition, reconstruct_chaos,
                                taylor_coeffs, verify_kernel_bounds)
from cksgrowth.growth import catalog_lookup

u = catalog_lookup("exp")
space = C.SpaceModel((2.0, 3.0))
phi = C.random_chaos(space, 3, np.random.default_rng(0))
print(sorted(phi.kernels), phi.l2_norm())

# %% [markdown]
# Weighted norms rise with the index `p`; the test-side norm divides by
# Legendre values, the dual side multiplies by them.

# %%
for p in (0.0, 1.0, 2.0):
    print(p, C.norm_test(phi, u, u, p, p), C.norm_dual(phi, u, u, p, p))

# %% [markdown]
# Two ways to get the S-transform: pair with an exponential vector, or
# integrate against a shifted complex Gaussian with Gauss-Hermite nodes.

# %%
xi = np.array([0.3 + 0.1j, -0.2])
eta = np.array([0.5, 0.4j])
print(C.s_transform(phi, xi, eta), C.s_transform_integral(phi, xi, eta))

# %% [markdown]
# Going back: discrete Cauchy integrals on polycircles recover the Taylor
# kernels, and rescaling by `2^{-(l+m)/2}` gives the chaos kernels.

# %%
F = AnalyticFunction.from_chaos_s_transform(phi)
back = reconstruct_chaos(F, 3, 3, space)
print((back - phi).l2_norm())

# %% [markdown]
# The growth constant `C_hat` of `F` is measured on a cloud of points; the
# Taylor kernels should then obey the degree-wise bound with that constant.

# %%
cert = check_growth_condition(F, u, u, 1.0, 1.0, 1.0, 1.0, space, n_dirs=16)
kernels = [taylor_coeffs(F, l, m) for (l, m) in phi.kernels]
rep = verify_kernel_bounds(kernels, space, cert.C_hat, 1.0, 1.0, 1.0, 1.0, 3.0, 3.0, u, u)
print(cert.C_hat, rep.verdict, rep.margin)

# %% [markdown]
# Norm equivalence needs `8 e^2 hs < 1` for the sup-to-norm direction.  With
# `lambda = 2` this first holds at a gap of three indices.

# %%
line = C.SpaceModel((2.0,))
for q in (3.0, 4.0):
    rep = C.norm_equivalence_experiment(line, u, u, 1.0, 1.0, q, q, n_samples=5, strict=False)
    print(q, rep["norm_by_sup_factor"][0], rep["sup_by_norm"]["max_ratio"], rep["norm_by_sup"] and rep["norm_by_sup"]["max_ratio"])
