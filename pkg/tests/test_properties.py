import math

import numpy as np
from hypothesis import given, settings, strategies as st

from cksgrowth import chaos as C
from cksgrowth.analytic import AnalyticFunction, reconstruct_chaos
from cksgrowth.growth import catalog_lookup
from cksgrowth.transforms import l_function, legendre

EXP = catalog_lookup("exp")
SP = C.SpaceModel((2.0, 3.0))
FAST = settings(max_examples=25, deadline=None)

seeds = st.integers(0, 2 ** 32 - 1)


@FAST
@given(beta=st.floats(0.0, 0.9), t=st.floats(0.05, 40.0), c=st.floats(0.1, 10.0))
def test_legendre_scaling_law(beta, t, c):
    # u(c r) has transform log l_u(t) + t log c
    u = catalog_lookup("kondratiev", {"beta": beta})
    a = legendre(u.scaled(c), t, method="numeric")
    b = legendre(u, t, method="numeric") + t * math.log(c)
    assert abs(a - b) <= 1e-6 * max(1.0, abs(b))


@FAST
@given(r=st.floats(0.0, 50.0), s=st.floats(0.0, 50.0))
def test_l_function_monotone(r, s):
    lo, hi = sorted((r, s))
    assert l_function(EXP, lo) <= l_function(EXP, hi) + 1e-12


@FAST
@given(seed=seeds, deg=st.integers(0, 4))
def test_pairing_is_symmetric(seed, deg):
    rng = np.random.default_rng(seed)
    a, b = C.random_chaos(SP, deg, rng), C.random_chaos(SP, deg, rng)
    assert np.isclose(C.pairing(a, b), C.pairing(b, a), rtol=1e-12, atol=1e-14)


@FAST
@given(seed=seeds, z=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_norm_homogeneity(seed, z):
    phi = C.random_chaos(SP, 3, np.random.default_rng(seed))
    n = C.norm_test(phi, EXP, EXP, 1.0, 1.0)
    assert math.isclose(C.norm_test(phi.scale(z), EXP, EXP, 1.0, 1.0), abs(z) * n, rel_tol=1e-12, abs_tol=1e-300)


@FAST
@given(seed=seeds, deg=st.integers(0, 3))
def test_s_transform_round_trip(seed, deg):
    Phi = C.random_chaos(SP, deg, np.random.default_rng(seed))
    back = reconstruct_chaos(AnalyticFunction.from_chaos_s_transform(Phi), deg, deg, SP)
    assert (back - Phi).l2_norm() <= 1e-11 * max(Phi.l2_norm(), 1e-300)
