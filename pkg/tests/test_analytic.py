import math

import numpy as np
import pytest

from cksgrowth import chaos as C
from cksgrowth.analytic import (AnalyticFunction, check_growth_condition, extract_all,
                                optimal_radius, reconstruct_chaos, taylor_coeffs,
                                verify_kernel_bounds)
from cksgrowth.growth import FAILS, HOLDS, catalog_lookup
from cksgrowth.transforms import dual_growth

EXP = catalog_lookup("exp")


def poly(d, *terms):
    return AnalyticFunction.from_polynomial(
        d, [{"idx_l": a, "idx_m": b, "re": complex(c).real, "im": complex(c).imag} for a, b, c in terms])


def test_constant_function():
    F = poly(2, ([], [], 1.0))
    k = taylor_coeffs(F, 0, 0)
    assert k.entries[((), ())] == pytest.approx(1.0, abs=1e-14)
    assert all(abs(v) < 1e-14 for v in taylor_coeffs(F, 1, 0).entries.values())


def test_bilinear_monomial():
    F = poly(2, ([0], [0], 1.0))
    k = taylor_coeffs(F, 1, 1)
    assert k.entries[((0,), (0,))] == pytest.approx(1.0, abs=1e-14)
    assert sum(abs(v) for key, v in k.entries.items() if key != ((0,), (0,))) < 1e-13


def test_symmetric_kernel_splits_mixed_monomial():
    # xi1 xi2 = sum_{i,j} k_ij xi_i xi_j with k_01 = k_10 = 1/2
    F = poly(2, ([0, 1], [], 1.0))
    k = taylor_coeffs(F, 2, 0)
    assert k.entries[((0, 1), ())] == pytest.approx(0.5, abs=1e-14)
    assert np.allclose(k.to_dense(), [[0, 0.5], [0.5, 0]], atol=1e-14)


def test_radius_invariance_for_polynomials():
    F = poly(2, ([0, 0], [1], 2 - 1j), ([1], [], 0.5), ([], [0, 1], 3.0))
    a = extract_all(F, 2, 2, radii=0.5)
    b = extract_all(F, 2, 2, radii=2.0)
    for key in set(a) | set(b):
        assert a.get(key, 0) == pytest.approx(b.get(key, 0), abs=1e-12)


def test_block_order_option():
    F = poly(2, ([0, 0], [1], 1.0))
    a = taylor_coeffs(F, 2, 1)
    b = taylor_coeffs(F, 2, 1, block_order="eta-first")
    assert (b.l, b.m) == (1, 2)
    assert b.swap_blocks().entries == a.entries


def test_scaled_linear_s_transform_recovers_basis_vector():
    sp = C.SpaceModel((2.0,))
    F = poly(1, ([0], [], math.sqrt(2)))
    Phi = reconstruct_chaos(F, 1, 1, sp)
    assert set(Phi.kernels) == {(1, 0)}
    assert Phi.kernels[(1, 0)].entries[((0,), ())] == pytest.approx(1.0, abs=1e-14)


def test_reconstruct_inverts_s_transform():
    sp = C.SpaceModel((2.0, 3.0))
    rng = np.random.default_rng(0)
    for _ in range(5):
        Phi = C.random_chaos(sp, 3, rng)
        back = reconstruct_chaos(AnalyticFunction.from_chaos_s_transform(Phi), 3, 3, sp)
        diff = back - Phi
        assert diff.l2_norm() <= 1e-12 * Phi.l2_norm()


def test_reconstruct_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        reconstruct_chaos(poly(2, ([], [], 1.0)), 1, 1, C.SpaceModel((2.0,)))


def test_non_finite_evaluator_raises():
    F = AnalyticFunction(1, lambda xi, eta: np.full(xi.shape[0], np.nan))
    with pytest.raises(FloatingPointError):
        F([0.0], [0.0])


@pytest.mark.parametrize("n", [1, 2, 3, 5])
@pytest.mark.parametrize("K", [1.0, 4.0])
def test_optimal_radius_closed_form(n, K):
    # exp is self-dual, so the objective is K n^2 r^2 / 2 - n log r
    r, bound = optimal_radius(dual_growth(EXP), K, n, return_bound=True)
    assert r == pytest.approx(1 / math.sqrt(K * n), rel=1e-6)
    want = (K * n * math.e) ** (n / 2) / math.factorial(n)
    assert bound == pytest.approx(want, rel=1e-9)


def test_optimal_radius_rejects_degree_zero():
    with pytest.raises(ValueError):
        optimal_radius(EXP, 1.0, 0)


@pytest.mark.parametrize("K,p", [(1.0, 0.0), (2.0, 0.0), (1.0, 1.0)])
def test_growth_constant_of_exponential_calculus_oracle(K, p):
    # |e^{xi}|^2 / e^{K lam^{2p} |xi|^2} peaks at xi = 1/(K lam^{2p}) with value e^{1/(K lam^{2p})}
    sp = C.SpaceModel((2.0,))
    F = AnalyticFunction(1, lambda xi, eta: np.exp(xi[:, 0]))
    cert = check_growth_condition(F, EXP, EXP, K, 1.0, p, p, sp)
    assert cert.holds
    assert cert.log_C_hat == pytest.approx(1 / (K * 4.0 ** p), rel=1e-7)


def test_growth_condition_fails_for_faster_growth():
    sp = C.SpaceModel((2.0,))
    F = AnalyticFunction(1, lambda xi, eta: np.exp(xi[:, 0] ** 2))
    cert = check_growth_condition(F, EXP, EXP, 1.0, 1.0, 0, 0, sp)
    assert cert.verdict == FAILS and cert.witnesses


def test_growth_condition_claimed_constant_too_small():
    sp = C.SpaceModel((2.0,))
    F = AnalyticFunction(1, lambda xi, eta: np.exp(xi[:, 0]))
    assert check_growth_condition(F, EXP, EXP, 1.0, 1.0, 0, 0, sp, claimed_C=2.0).verdict == FAILS
    assert check_growth_condition(F, EXP, EXP, 1.0, 1.0, 0, 0, sp, claimed_C=2.8).verdict == HOLDS


def _pipeline(sp, seed=0):
    Phi = C.random_chaos(sp, 3, np.random.default_rng(seed))
    F = AnalyticFunction.from_chaos_s_transform(Phi)
    cert = check_growth_condition(F, EXP, EXP, 1.0, 1.0, 1.0, 1.0, sp, n_dirs=16)
    kernels = [taylor_coeffs(F, l, m) for l in range(4) for m in range(4 - l)]
    return cert, kernels


def test_kernel_bounds_from_measured_growth_constant():
    sp = C.SpaceModel((2.0, 3.0))
    cert, kernels = _pipeline(sp)
    assert cert.holds and math.isfinite(cert.C_hat)
    rep = verify_kernel_bounds(kernels, sp, cert.C_hat, 1.0, 1.0, 1.0, 1.0, 3.0, 3.0, EXP, EXP)
    assert rep.verdict == HOLDS and rep.margin > 0
    assert all(rep.details["summable"])


def test_kernel_bounds_detect_inflated_kernel():
    sp = C.SpaceModel((2.0, 3.0))
    cert, kernels = _pipeline(sp)
    kernels[-1] = kernels[-1].scale(1e6)
    rep = verify_kernel_bounds(kernels, sp, cert.C_hat, 1.0, 1.0, 1.0, 1.0, 3.0, 3.0, EXP, EXP)
    assert rep.verdict == FAILS
    assert rep.witness[0]["l"] + rep.witness[0]["m"] == 3


def test_kernel_bounds_index_preconditions():
    sp = C.SpaceModel((2.0,))
    k = [taylor_coeffs(poly(1, ([], [], 1.0)), 0, 0)]
    with pytest.raises(C.PreconditionError):
        verify_kernel_bounds(k, sp, 1.0, 1, 1, 2, 2, 1, 1, EXP, EXP)
    with pytest.raises(C.PreconditionError):
        verify_kernel_bounds(k, sp, 1.0, 1, 1, 1, 1, 2, 2, EXP, EXP, direction="primal")


def test_primal_direction_for_test_function_transform():
    # S-transform of a test function grows like u(K |xi|^2_{-p}); kernels bounded in |.|_{q} with q < p
    sp = C.SpaceModel((2.0, 3.0))
    phi = C.random_chaos(sp, 3, np.random.default_rng(1))
    F = AnalyticFunction.from_chaos_s_transform(phi)
    cert = check_growth_condition(F, EXP, EXP, 1.0, 1.0, 3.0, 3.0, sp, direction="primal", n_dirs=16)
    assert cert.holds
    kernels = [taylor_coeffs(F, l, m) for l in range(4) for m in range(4 - l)]
    rep = verify_kernel_bounds(kernels, sp, cert.C_hat, 1.0, 1.0, 3.0, 3.0, 1.0, 1.0, EXP, EXP,
                               direction="primal")
    assert rep.verdict == HOLDS
