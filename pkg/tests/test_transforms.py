import math

import numpy as np
import pytest

from cksgrowth.growth import GrowthFunction, catalog_lookup
from cksgrowth.transforms import (DivergentTransformError, TruncationError, dual_growth,
                                  dual_legendre, l_function, l_function_complex, legendre,
                                  legendre_of_dual, legendre_table, verify_dual_legendre_identity,
                                  verify_l_bound, verify_l_scaling, verify_l_sqrt_bound,
                                  weight_sequence)

EXP = catalog_lookup("exp")


def dense_legendre(u, t, lo=-30.0, hi=30.0, n=200_001):
    x = np.linspace(lo, hi, n)
    return np.min(u(np.exp(x))[None, :] - np.outer(t, x), axis=1)


def dense_dual(u, r, lo=-30.0, hi=30.0, n=200_001):
    y = np.linspace(lo, hi, n)
    s = np.exp(y)
    vals = 2.0 * np.outer(np.sqrt(r), s) - u(s * s)[None, :]
    return np.maximum(np.max(vals, axis=1), -u(0.0))


@pytest.mark.parametrize("spec", [("exp", {}), ("kondratiev", {"beta": 0.5}),
                                  ("ouerdiane", {"k": 1.5}), ("bell", {})])
def test_numeric_legendre_matches_dense_grid(spec):
    u = catalog_lookup(*spec)
    t = np.array([0.2, 1.0, 3.0, 7.5])
    got = legendre(u, t, method="numeric")
    assert np.allclose(got, dense_legendre(u, t), rtol=1e-6, atol=1e-6)


def test_legendre_exp_closed_form():
    t = np.linspace(0.1, 50, 100)
    got = legendre(EXP, t, method="numeric")
    assert np.allclose(got, t * (1 - np.log(t)), rtol=1e-10)


def test_legendre_at_zero_is_inf_u():
    assert legendre(EXP, 0.0, method="numeric") == pytest.approx(0.0, abs=1e-12)


def test_legendre_table_argmins():
    t = np.array([0.5, 1.0, 4.0])
    tab = legendre_table(EXP, t)
    # minimizer of e^r / r^t is r = t
    assert np.allclose(tab.argmins, t, rtol=1e-5)
    assert tab.diagnostics["finite"]


def test_legendre_diverges_for_bounded_u():
    bounded = GrowthFunction("bounded", {}, lambda r: 1.0 - np.exp(-r))
    with pytest.raises(DivergentTransformError):
        legendre(bounded, 1.0)


@pytest.mark.parametrize("beta", [0.0, 0.25, 0.5, 0.75])
def test_dual_kondratiev(beta):
    u = catalog_lookup("kondratiev", {"beta": beta})
    r = np.linspace(0, 100, 200)
    got = dual_legendre(u, r, method="numeric")
    want = (1 - beta) * r ** (1 / (1 - beta))
    assert np.allclose(got, want, rtol=1e-8, atol=1e-10)


def test_dual_matches_dense_grid_for_bell():
    u = catalog_lookup("bell")
    r = np.array([0.5, 2.0, 10.0])
    assert np.allclose(dual_legendre(u, r), dense_dual(u, r), rtol=1e-6)


def test_dual_diverges_for_slow_growth():
    slow = GrowthFunction("sqrt", {}, lambda r: np.sqrt(r))
    with pytest.raises(DivergentTransformError):
        dual_legendre(slow, 1.0)


def test_double_dual_returns_original():
    bell = catalog_lookup("bell")
    back = dual_legendre(dual_growth(bell, numeric=True), np.array([1.0, 2.0]), method="numeric")
    assert np.allclose(back, bell(np.array([1.0, 2.0])), rtol=1e-6)


@pytest.mark.parametrize("spec", [("exp", {}), ("kondratiev", {"beta": 0.25}),
                                  ("ouerdiane", {"k": 1.5}), ("bell", {})])
def test_legendre_of_dual_identity(spec):
    u = catalog_lookup(*spec)
    rep = verify_dual_legendre_identity(u, np.linspace(0.1, 30, 40))
    assert rep.holds, rep.details


def test_legendre_of_dual_at_zero():
    assert legendre_of_dual(EXP, 0.0) == pytest.approx(0.0)


def test_l_function_series_oracle():
    r = 1.0
    n = np.arange(1, 200)
    direct = 1.0 + np.sum(np.exp(n * (1 - np.log(n)) + n * math.log(r)))
    assert l_function(EXP, r) == pytest.approx(math.log(direct), rel=1e-14)
    assert math.exp(l_function(EXP, 1.0)) == pytest.approx(6.5804, abs=1e-4)


def test_l_function_at_zero_and_monotone_degree():
    assert l_function(EXP, 0.0) == 0.0
    r = np.geomspace(0.01, 100, 10)
    vals, degs = l_function(EXP, r, return_degree=True)
    assert np.all(np.diff(vals) > 0)
    assert np.all(np.diff(degs) >= 0)


def test_l_function_truncation_error():
    with pytest.raises(TruncationError):
        l_function(EXP, 100.0, max_degree=5)


def test_l_function_complex_matches_direct_sum():
    z = np.array([0.3 + 0.4j, -1.2 + 0.1j, 2j])
    n = np.arange(0, 120)
    ell = np.exp(legendre(EXP, n.astype(float)))
    direct = np.array([np.sum(ell * zi ** n) for zi in z])
    got = np.exp(l_function_complex(EXP, z))
    assert np.allclose(got, direct, rtol=1e-12)


def test_weight_sequence_exp():
    ws = weight_sequence(EXP, 20)
    assert ws.alpha[2] == pytest.approx(2 / math.e ** 2, rel=1e-12)
    assert ws.alpha[0] == pytest.approx(1.0)


@pytest.mark.parametrize("spec", [("exp", {}), ("kondratiev", {"beta": 0.5})])
@pytest.mark.parametrize("a", [2.0, math.e])
def test_l_bounds_hold(spec, a):
    u = catalog_lookup(*spec)
    assert verify_l_bound(u, a).holds
    assert verify_l_sqrt_bound(u, 2, a).holds


def test_l_scaling_constant_finite():
    rep = verify_l_scaling(EXP, 2)
    assert rep.holds and math.isfinite(rep.details["C_hat"])


def test_l_bound_rejects_bad_a():
    with pytest.raises(ValueError):
        verify_l_bound(EXP, 1.0)
