"""Acceptance criteria, one test each.

Every test prints ``criterion N: PASS|FAIL  <detail>`` and records the line
for the terminal summary.  Run ``pytest tests/test_acceptance.py -v -s``.
"""

import math

import numpy as np
import pytest

from cksgrowth import chaos as C
from cksgrowth.analytic import (AnalyticFunction, check_growth_condition, reconstruct_chaos,
                                taylor_coeffs, verify_kernel_bounds)
from cksgrowth.cli import main as cli_main
from cksgrowth.growth import HOLDS, catalog_lookup
from cksgrowth.measures import (CONVERGED, DIVERGENT, NO_VIOLATION, NOT_POSITIVE,
                                ProductMeasureModel, boundedness_probe, integrability_estimate,
                                integrability_exact_gaussian, measure_to_chaos, moment_matrix,
                                omega_bound_check, parse_measure_spec, positivity_probe,
                                pseudo_positivity_probe)
from cksgrowth.transforms import (dual_legendre, legendre, verify_dual_legendre_identity,
                                  verify_l_bound, verify_l_scaling, verify_l_sqrt_bound)

RESULTS = {}
EXP = catalog_lookup("exp")
BETAS = (0.0, 0.25, 0.5, 0.75)


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def rel_err(a, b, atol=1e-12):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), atol)))


def dense_legendre(u, t, n=100_000):
    x = np.linspace(-10.0, 10.0, n)
    return np.min(u(np.exp(x))[None, :] - np.outer(t, x), axis=1)


def test_closed_form_legendre():
    t = np.linspace(0.1, 50, 100)
    cases = [(EXP, t * (1 - np.log(t)))]
    cases += [(catalog_lookup("kondratiev", {"beta": b}), (1 + b) * (t - t * np.log(t))) for b in BETAS]
    grid_ok, calc_ok, worst = True, True, 0.0
    for u, calculus in cases:
        got = legendre(u, t, method="numeric")
        grid_ok &= np.allclose(got, dense_legendre(u, t), rtol=1e-5, atol=1e-5)
        calc_ok &= np.allclose(got, calculus, rtol=1e-8, atol=1e-12)
        worst = max(worst, float(np.max(np.abs(got - calculus) / np.maximum(np.abs(calculus), 1e-12))))
    record(1, grid_ok and calc_ok, f"dense grid agrees: {grid_ok}; max rel err vs calculus {worst:.2e}")


def test_dual_pairs():
    r = np.linspace(0, 100, 200)
    worst = rel_err(dual_legendre(EXP, r, method="numeric"), r)
    for b in BETAS:
        u = catalog_lookup("kondratiev", {"beta": b})
        want = (1 - b) * r ** (1 / (1 - b))
        worst = max(worst, rel_err(dual_legendre(u, r, method="numeric"), want))
    record(2, worst <= 1e-6, f"max rel err {worst:.2e}")


def test_dual_legendre_identity():
    t = np.linspace(0.1, 30, 60)
    fns = [EXP, catalog_lookup("bell")]
    fns += [catalog_lookup("kondratiev", {"beta": b}) for b in BETAS]
    fns += [catalog_lookup("ouerdiane", {"k": k}) for k in (1.5, 2.0)]
    fns = [u for u in fns if u.claims("U3") and u.meta.get("in_C_half", True)]
    bad = [u.label for u in fns if verify_dual_legendre_identity(u, t, rtol=1e-6).verdict != HOLDS]
    record(3, not bad, f"{len(fns)} functions checked; failing: {bad or 'none'}")


def test_l_function_bounds():
    fns = [EXP] + [catalog_lookup("kondratiev", {"beta": b}) for b in BETAS]
    bad = []
    for u in fns:
        for a in (2.0, math.e):
            if not verify_l_bound(u, a).holds:
                bad.append((u.label, "bound", a))
            if not verify_l_sqrt_bound(u, 2, a).holds:
                bad.append((u.label, "sqrt", a))
        rep = verify_l_scaling(u, 2)
        if not (rep.holds and math.isfinite(rep.details["C_hat"])):
            bad.append((u.label, "scaling"))
    record(4, not bad, f"failures: {bad or 'none'}")


def test_s_transform_round_trip():
    sp = C.SpaceModel((2.0, 3.0))
    rng = np.random.default_rng(20)
    worst_coef, worst_int = 0.0, 0.0
    for _ in range(25):
        Phi = C.random_chaos(sp, 4, rng)
        back = reconstruct_chaos(AnalyticFunction.from_chaos_s_transform(Phi), 4, 4, sp)
        for key, k in Phi.kernels.items():
            got = back.kernels.get(key)
            for idx, v in k.entries.items():
                g = got.entries.get(idx, 0.0) if got else 0.0
                worst_coef = max(worst_coef, abs(g - v) / abs(v))
        xi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        eta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        a, b = C.s_transform(Phi, xi, eta), C.s_transform_integral(Phi, xi, eta)
        worst_int = max(worst_int, abs(a - b) / max(1.0, abs(a)))
    ok = worst_coef <= 1e-8 and worst_int <= 1e-10
    record(5, ok, f"max coefficient rel err {worst_coef:.2e}; pairing vs quadrature {worst_int:.2e}")


def test_kernel_bound_pipeline():
    sp = C.SpaceModel((2.0, 3.0))
    rng = np.random.default_rng(6)
    margins, inflated_rejected = [], True
    for _ in range(3):
        Phi = C.random_chaos(sp, 3, rng)
        F = AnalyticFunction.from_chaos_s_transform(Phi)
        cert = check_growth_condition(F, EXP, EXP, 1.0, 1.0, 1.0, 1.0, sp, n_dirs=16)
        kernels = [taylor_coeffs(F, l, m) for (l, m) in Phi.kernels]
        rep = verify_kernel_bounds(kernels, sp, cert.C_hat, 1.0, 1.0, 1.0, 1.0, 3.0, 3.0, EXP, EXP)
        margins.append(rep.margin if rep.verdict == HOLDS and cert.holds else -math.inf)
        kernels[-1] = kernels[-1].scale(1e6)
        bad = verify_kernel_bounds(kernels, sp, cert.C_hat, 1.0, 1.0, 1.0, 1.0, 3.0, 3.0, EXP, EXP)
        inflated_rejected &= bad.verdict != HOLDS
    ok = min(margins) > 0 and inflated_rejected
    record(6, ok, f"min log margin {min(margins):.3f}; inflated kernel rejected: {inflated_rejected}")


def test_norm_equivalence_at_p1_q3():
    # stated at (p, q) = (1, 3) with lambda = 2; run as stated
    sp = C.SpaceModel((2.0,))
    rep = C.norm_equivalence_experiment(sp, EXP, EXP, 1.0, 1.0, 3.0, 3.0, n_samples=100, degree=3,
                                        seed=7, strict=False)
    pre = all(rep["norm_by_sup_precondition"])
    sup_ok = rep["sup_by_norm"]["all_pass"]
    norm_ok = rep["norm_by_sup"] is not None and rep["norm_by_sup"]["all_pass"]
    detail = (f"precondition 8e^2*hs = {rep['norm_by_sup_factor'][0]:.3f} (< 1 needed): {pre}; "
              f"sup <= C*norm: {sup_ok} (max ratio {rep['sup_by_norm']['max_ratio']:.2e}); "
              f"norm <= C*sup: {norm_ok if rep['norm_by_sup'] is not None else 'not evaluable'}")
    record(7, pre and sup_ok and norm_ok, detail)


def _gauss_model(var):
    s = math.sqrt(var)
    nu = parse_measure_spec(f"gaussian:sigma={s}", 1)
    return ProductMeasureModel(nu, nu, C.SpaceModel((2.0,)))


def test_integrability():
    sp = C.SpaceModel((2.0,))
    parts, ok = [], True
    for var in (0.25, 1.0):
        m = _gauss_model(var)
        est = integrability_estimate(m, EXP, EXP, 0.5, 0.5, n=100_000, seed=0)
        exact = integrability_exact_gaussian(var, var, 0.5, 0.5, sp)
        covered = est.ci[0] <= exact <= est.ci[1]
        probe = boundedness_probe(m, EXP, EXP, 0.5, 0.5, family_size=20, n=20_000, seed=0, sup_budget=8)
        bounded = probe.value <= est.estimate + est.half_width
        ok &= covered and bounded
        parts.append(f"var {var}: {est.estimate:.4f} [{est.ci[0]:.4f}, {est.ci[1]:.4f}] vs {exact:.4f}, "
                     f"K_hat {probe.value:.3f}")
    div = integrability_estimate(_gauss_model(3.0), EXP, EXP, 0.5, 0.5, n=100_000, seed=0)
    ok &= div.diagnostic == DIVERGENT
    parts.append(f"var 3: {div.diagnostic}")
    record(8, ok, "; ".join(parts))


def test_omega_bound():
    rep = omega_bound_check(EXP, EXP, 1.0, 1.0, C.SpaceModel((2.0,)), n=1000, seed=0)
    record(9, rep.verdict == HOLDS, f"{rep.verdict}, log margin {rep.margin:.3f}")


def test_positivity_soundness():
    sp = C.SpaceModel((2.0, 3.0))
    specs = [("gaussian:sigma=0.5", "gaussian:sigma=0.5"),
             ("gaussian:sigma=1", "gaussian_diag:sigmas=[0.3,1.2]"),
             ("pointmass:at=[0.4,-1]", "gaussian:sigma=0.8"),
             ("pointmass:at=[1,1]", "pointmass:at=[-0.5,2]"),
             ("student_t:nu=9", "gaussian:sigma=1")]
    verdicts = []
    for s1, s2 in specs:
        Phi = measure_to_chaos(parse_measure_spec(s1, 2), parse_measure_spec(s2, 2), sp, 4, 4)
        verdicts.append(positivity_probe(Phi, family_size=100, seed=1).verdict)
    neg = positivity_probe(C.ChaosVector.constant(sp, -1.0), family_size=100, seed=1)
    M = moment_matrix(parse_measure_spec("gaussian:sigma=0.7", 2), parse_measure_spec("gaussian:sigma=1.1", 2), 4)
    pseudo = pseudo_positivity_probe(M, 2, 4, family_size=100, seed=1)
    bad = M - 2.0 * np.diag(np.diag(M))
    pseudo_bad = pseudo_positivity_probe(bad, 2, 4, family_size=100, seed=1)
    ok = (all(v == NO_VIOLATION for v in verdicts) and neg.verdict == NOT_POSITIVE
          and pseudo.verdict == NO_VIOLATION and pseudo_bad.verdict == NOT_POSITIVE)
    record(10, ok, f"fixtures {verdicts}; negated constant {neg.verdict}; "
                   f"moment operator {pseudo.verdict}; negated diagonal {pseudo_bad.verdict}")


CLI_RUNS = [
    ["transform", "--legendre", "--dual", "--lfunction", "--weights", "--fn", "kondratiev:beta=0.5"],
    ["verify", "--conditions", "U0,U1,U3"],
    ["characterize", "--fixture", "polynomial", "--degree", "2"],
    ["measure", "--d", "1", "--n", "20000", "--seed", "5", "--nu1", "gaussian:sigma=0.5"],
]


def test_cli_determinism(tmp_path, capsys):
    same = []
    for i, argv in enumerate(CLI_RUNS):
        first = tmp_path / f"run{i}.jsonl"
        code1 = cli_main(argv + ["--out", str(first)])
        again = tmp_path / f"rerun{i}.jsonl"
        code2 = cli_main(["--config", str(first) + ".config", "--out", str(again)])
        same.append(code1 == code2 and first.read_bytes() == again.read_bytes())
    capsys.readouterr()
    record(11, all(same), f"byte-identical reruns: {same}")
