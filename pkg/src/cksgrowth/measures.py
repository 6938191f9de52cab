"""Product measures on ``R^d x R^d`` and the generalized functions they induce.

A product measure ``nu1 x nu2`` pairs with a test function by integration;
it defines a generalized function exactly when
``int int u1(|x|^2_{-p1})^{1/2} u2(|y|^2_{-p2})^{1/2} dnu1 dnu2`` is finite.
This module estimates that integral by seeded Monte Carlo, compares it with
the Gaussian closed form, and probes positivity of functionals and of
finite-rank bilinear operators.
"""

from dataclasses import dataclass, field
import json
import math
import re

import numpy as np
from scipy import stats
from scipy.special import gammaln, logsumexp

from .chaos import (ChaosVector, KernelTensor, SpaceModel, evaluate, exponential_vector,
                    index_keys, multiply, pairing, random_chaos, sup_norm)
from .growth import ConditionReport, FAILS, HOLDS, ParseError
from .transforms import l_function_complex

__all__ = [
    "Measure",
    "ProductMeasureModel",
    "IntegrabilityEstimate",
    "FunctionalEstimate",
    "ProbeReport",
    "parse_measure_spec",
    "integrability_estimate",
    "integrability_exact_gaussian",
    "induced_functional",
    "boundedness_probe",
    "omega_test_function",
    "omega_bound_check",
    "measure_to_chaos",
    "positivity_probe",
    "moment_matrix",
    "pseudo_positivity_probe",
    "CONVERGED",
    "DIVERGENT",
    "NOT_POSITIVE",
    "NO_VIOLATION",
]

CONVERGED = "converged"
DIVERGENT = "suspected-divergent"
NOT_POSITIVE = "not-positive"
NO_VIOLATION = "no-violation-found"


# ------------------------------------------------------------ measures

def _double_factorial_odd(k):
    """``(k-1)!!`` for even ``k``."""
    return math.exp(gammaln(k + 1) - (k // 2) * math.log(2.0) - gammaln(k // 2 + 1))


@dataclass(frozen=True, eq=False)
class Measure:
    """Probability measure on ``R^d`` with independent coordinates."""

    kind: str
    params: dict
    d: int

    def sample(self, rng, n):
        if self.kind == "pointmass":
            return np.broadcast_to(np.asarray(self.params["at"], dtype=float), (n, self.d)).copy()
        if self.kind == "gaussian":
            return rng.standard_normal((n, self.d)) * self.sigmas
        if self.kind == "student_t":
            return rng.standard_t(self.params["nu"], size=(n, self.d)) * self.params.get("sigma", 1.0)
        raise ValueError(f"unknown measure kind {self.kind!r}")

    @property
    def sigmas(self):
        return np.broadcast_to(np.asarray(self.params["sigmas"], dtype=float), (self.d,))

    def log_density(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "gaussian":
            return np.sum(stats.norm.logpdf(x, scale=self.sigmas), axis=1)
        if self.kind == "student_t":
            s = self.params.get("sigma", 1.0)
            return np.sum(stats.t.logpdf(x, self.params["nu"], scale=s), axis=1)
        return None

    def coordinate_moment(self, j, k):
        """``E[x_j^k]``; raises ``ValueError`` when it does not exist."""
        if k == 0:
            return 1.0
        if self.kind == "pointmass":
            return float(self.params["at"][j]) ** k
        if k % 2:
            if self.kind == "student_t" and k >= self.params["nu"]:
                raise ValueError(f"moment of order {k} does not exist for nu={self.params['nu']}")
            return 0.0
        if self.kind == "gaussian":
            return self.sigmas[j] ** k * _double_factorial_odd(k)
        if self.kind == "student_t":
            nu = self.params["nu"]
            if k >= nu:
                raise ValueError(f"moment of order {k} does not exist for nu={nu}")
            s = self.params.get("sigma", 1.0)
            out = nu ** (k // 2)
            for i in range(1, k // 2 + 1):
                out *= (2 * i - 1) / (nu - 2 * i)
            return s ** k * out
        raise ValueError(f"unknown measure kind {self.kind!r}")

    def moment(self, exponents):
        return math.prod(self.coordinate_moment(j, k) for j, k in enumerate(exponents))

    def exp_quadratic(self, a):
        """``E exp(sum a_j x_j^2 / 2)`` in closed form, or ``None`` if unknown."""
        a = np.broadcast_to(np.asarray(a, dtype=float), (self.d,))
        if self.kind == "pointmass":
            at = np.asarray(self.params["at"], dtype=float)
            return float(np.exp(0.5 * np.sum(a * at ** 2)))
        if self.kind == "gaussian":
            s = a * self.sigmas ** 2
            if np.any(s >= 1.0):
                return math.inf
            return float(np.prod((1.0 - s) ** -0.5))
        if self.kind == "student_t":
            return math.inf if np.any(a > 0) else None
        return None

    @property
    def label(self):
        return f"{self.kind}:" + ",".join(f"{k}={json.dumps(_plain(v))}" for k, v in self.params.items())


def _plain(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


_MEASURE_PARAMS = {
    "gaussian": {"sigma"},
    "gaussian_diag": {"sigmas"},
    "pointmass": {"at"},
    "student_t": {"nu", "sigma"},
}


def _split_params(text, start):
    """Split ``k=v,k=v`` on commas outside brackets; yields ``(key, raw, column)``."""
    depth, col, buf = 0, start, []
    parts = []
    for i, ch in enumerate(text[start:], start):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(("".join(buf), col))
            buf, col = [], i + 1
        else:
            buf.append(ch)
    parts.append(("".join(buf), col))
    for raw, c in parts:
        m = re.fullmatch(r"\s*([A-Za-z_]\w*)\s*=\s*(.+?)\s*", raw)
        if not m:
            raise ParseError("expected name=value", text, c)
        yield m.group(1), m.group(2), c


def parse_measure_spec(text, d=None):
    """Parse ``gaussian:sigma=1``, ``gaussian_diag:sigmas=[1,2]``, ``pointmass:at=[0,0]``, ``student_t:nu=3``.

    ``sigma`` is a standard deviation.  ``d`` is required for the isotropic
    kinds and is checked against list lengths otherwise.
    """
    kind, sep, rest = text.partition(":")
    if kind not in _MEASURE_PARAMS:
        raise ParseError(f"unknown measure {kind!r}", text, 0)
    params = {}
    if sep and rest.strip():
        for key, raw, col in _split_params(text, len(kind) + 1):
            if key not in _MEASURE_PARAMS[kind]:
                raise ParseError(f"unknown parameter {key!r} for {kind}", text, col)
            try:
                params[key] = json.loads(raw)
            except json.JSONDecodeError:
                raise ParseError("value must be a number or [list]", text, col + len(key) + 1) from None
    missing = {"gaussian": "sigma", "gaussian_diag": "sigmas", "pointmass": "at", "student_t": "nu"}[kind]
    if missing not in params:
        raise ParseError(f"{kind} needs {missing}=", text, len(text))
    if kind in ("gaussian_diag", "pointmass"):
        vec = params["sigmas" if kind == "gaussian_diag" else "at"]
        if not isinstance(vec, list) or not all(isinstance(v, (int, float)) for v in vec):
            raise ParseError("expected a list of numbers", text, len(kind) + 1)
        if d is not None and len(vec) != d:
            raise ParseError(f"list length {len(vec)} does not match d={d}", text, len(kind) + 1)
        d = len(vec)
    elif d is None:
        raise ValueError("dimension d is required for isotropic measures")
    if kind == "gaussian":
        if params["sigma"] < 0:
            raise ParseError("sigma must be >= 0", text, len(kind) + 1)
        return Measure("gaussian", {"sigmas": [float(params["sigma"])] * d}, d)
    if kind == "gaussian_diag":
        if any(s < 0 for s in params["sigmas"]):
            raise ParseError("sigmas must be >= 0", text, len(kind) + 1)
        return Measure("gaussian", {"sigmas": [float(s) for s in params["sigmas"]]}, d)
    if kind == "pointmass":
        return Measure("pointmass", {"at": [float(v) for v in params["at"]]}, d)
    if params["nu"] <= 0:
        raise ParseError("nu must be > 0", text, len(kind) + 1)
    return Measure("student_t", {k: float(v) for k, v in params.items()}, d)


@dataclass(frozen=True, eq=False)
class ProductMeasureModel:
    """``nu1 x nu2`` over a space model; the first factor carries ``x``."""

    nu1: Measure
    nu2: Measure
    space: SpaceModel

    def __post_init__(self):
        if self.nu1.d != self.space.d or self.nu2.d != self.space.d:
            raise ValueError("measure dimensions must match the space model")

    def sample(self, rng, n):
        return self.nu1.sample(rng, n), self.nu2.sample(rng, n)

    def moment_check(self, n=20000, seed=0, order=2):
        """Sample means of ``x_j^order`` against the oracle, in standard errors."""
        rng = np.random.default_rng(seed)
        out = {}
        for name, nu in (("nu1", self.nu1), ("nu2", self.nu2)):
            x = nu.sample(rng, n) ** order
            se = np.std(x, axis=0, ddof=1) / math.sqrt(n)
            oracle = np.array([nu.coordinate_moment(j, order) for j in range(nu.d)])
            z = np.abs(np.mean(x, axis=0) - oracle) / np.where(se > 0, se, 1.0)
            out[name] = {"z": z.tolist(), "within_4se": bool(np.all(z <= 4.0))}
        return out


# --------------------------------------------------- integrability

@dataclass
class IntegrabilityEstimate:
    estimate: float
    ci: tuple
    level: float
    half_width: float
    diagnostic: str
    n: int
    n_batches: int
    seed: int
    running_means: list
    growth_factors: list
    tail_index: float

    @property
    def converged(self):
        return self.diagnostic == CONVERGED

    def to_dict(self):
        return {
            "integral": self.estimate, "ci": list(self.ci), "level": self.level,
            "half_width": self.half_width, "verdict": self.diagnostic, "n": self.n,
            "n_batches": self.n_batches, "seed": self.seed, "running_means": self.running_means,
            "growth_factors": self.growth_factors, "tail_index": self.tail_index,
        }


def _log_weight(model, u1, u2, p1, p2, x, y):
    sp = model.space
    with np.errstate(over="ignore"):
        return 0.5 * u1(sp.sqnorm(x, -p1)) + 0.5 * u2(sp.sqnorm(y, -p2))


def _batched_samples(model, n, seed, n_batches):
    """Independent per-batch streams split from one root seed."""
    per = n // n_batches
    children = np.random.SeedSequence(seed).spawn(n_batches)
    xs, ys = [], []
    for ss in children:
        x, y = model.sample(np.random.default_rng(ss), per)
        xs.append(x)
        ys.append(y)
    return xs, ys


def _t_halfwidth(batch_means, level):
    b = len(batch_means)
    with np.errstate(over="ignore"):
        s = float(np.std(batch_means, ddof=1))
    return float(stats.t.ppf(0.5 + 0.5 * level, b - 1)) * s / math.sqrt(b)


def _hill_index(logs, k=None):
    """Hill estimate of the tail index from log-values of a positive sample."""
    logs = np.sort(logs)[::-1]
    if k is None:
        k = max(10, int(math.sqrt(logs.size)))
    k = min(k, logs.size - 1)
    excess = logs[:k] - logs[k]
    m = float(np.mean(excess))
    return math.inf if m <= 0 else 1.0 / m


def integrability_estimate(model, u1, u2, p1, p2, n=100_000, seed=0, n_batches=20, level=0.99,
                           growth_threshold=1.5):
    """Monte-Carlo estimate of ``E[u1(|x|^2_{-p1})^{1/2} u2(|y|^2_{-p2})^{1/2}]``.

    The confidence interval comes from batch means with a Student t quantile.
    Divergence is a heuristic: running means over doubling prefixes that grow
    by more than ``growth_threshold`` twice in a row, or a Hill tail index
    of the integrand at most 1 (no finite mean), mark the run
    ``suspected-divergent``.
    """
    if n < 1000:
        raise ValueError("need at least 1000 samples")
    xs, ys = _batched_samples(model, n, seed, n_batches)
    logs = [_log_weight(model, u1, u2, p1, p2, x, y) for x, y in zip(xs, ys)]
    all_logs = np.concatenate(logs)
    n_used = all_logs.size
    with np.errstate(over="ignore"):
        batch_means = np.array([float(np.mean(np.exp(lg))) for lg in logs])
    est = float(np.mean(batch_means))
    hw = _t_halfwidth(batch_means, level) if np.all(np.isfinite(batch_means)) else math.inf

    sizes = [n_used // 8, n_used // 4, n_used // 2, n_used]
    with np.errstate(over="ignore"):
        running = [float(np.exp(logsumexp(all_logs[:s]) - math.log(s))) for s in sizes]
    factors = [b / a if a > 0 else math.inf for a, b in zip(running, running[1:])]
    grows = any(f1 > growth_threshold and f2 > growth_threshold for f1, f2 in zip(factors, factors[1:]))
    alpha = _hill_index(all_logs)
    diverging = grows or alpha <= 1.0 or not math.isfinite(est)
    return IntegrabilityEstimate(
        estimate=est, ci=(est - hw, est + hw), level=level, half_width=hw,
        diagnostic=DIVERGENT if diverging else CONVERGED, n=n_used, n_batches=n_batches,
        seed=seed, running_means=running, growth_factors=factors, tail_index=alpha,
    )


def integrability_exact_gaussian(var1, var2, p1, p2, space):
    """``prod_j (1 - var_j lam_j^{-2p})^{-1/2}`` over both factors; ``inf`` past the pole.

    Valid for ``u1 = u2 = exp`` and centred Gaussians with diagonal
    covariances ``var1``, ``var2``.
    """
    out = 1.0
    for var, p in ((var1, p1), (var2, p2)):
        a = np.broadcast_to(np.asarray(var, dtype=float), (space.d,)) * space.lam_array ** (-2.0 * p)
        if np.any(a >= 1.0):
            return math.inf
        out *= float(np.prod((1.0 - a) ** -0.5))
    return out


# --------------------------------------------------- induced functional

@dataclass
class FunctionalEstimate:
    value: complex
    half_width: float
    level: float
    n: int

    @property
    def ci_real(self):
        return (self.value.real - self.half_width, self.value.real + self.half_width)


def _phi_values(phi, x, y):
    if isinstance(phi, ChaosVector):
        return evaluate(phi, x.astype(complex), y.astype(complex))
    return np.asarray(phi(x, y), dtype=complex)


def induced_functional(model, phi, n=100_000, seed=0, n_batches=20, level=0.99, samples=None):
    """``int int phi(x, y) nu1(dx) nu2(dy)`` by Monte Carlo at real points.

    The half-width covers real and imaginary parts jointly (their maximum).
    Passing ``samples`` (per-batch lists of ``x`` and ``y``) reuses draws.
    """
    xs, ys = samples if samples is not None else _batched_samples(model, n, seed, n_batches)
    means = np.array([np.mean(_phi_values(phi, x, y)) for x, y in zip(xs, ys)])
    val = complex(np.mean(means))
    hw = max(_t_halfwidth(means.real, level), _t_halfwidth(means.imag, level))
    return FunctionalEstimate(value=val, half_width=hw, level=level, n=sum(len(x) for x in xs))


# --------------------------------------------------- boundedness

@dataclass
class ProbeReport:
    verdict: str
    value: float
    witness: dict
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"verdict": self.verdict, "value": self.value, "witness": self.witness, **self.details}


def boundedness_probe(model, u1, u2, p1, p2, family_size=50, degree=3, n=20_000, seed=0,
                      n_batches=20, level=0.99, family=None, sup_budget=16):
    """Measured ``K_hat = max |<<Phi_nu, phi>>| / |||phi|||_{p1,p2}`` over a random family.

    The weighted sup of each ``phi`` is taken over complex points and over the
    Monte-Carlo sample itself, so ``K_hat`` never exceeds the sample mean of
    the integrability weight.  The verdict compares ``K_hat`` with the upper
    confidence limit of the integrability estimate.
    """
    integ = integrability_estimate(model, u1, u2, p1, p2, n=n, seed=seed, n_batches=n_batches, level=level)
    samples = _batched_samples(model, n, seed, n_batches)
    xs, ys = samples
    x_all, y_all = np.concatenate(xs), np.concatenate(ys)
    logw = _log_weight(model, u1, u2, p1, p2, x_all, y_all)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(n_batches + 1)[-1])
    if family is None:
        family = [ChaosVector.constant(model.space)]
        family += [random_chaos(model.space, 1 + i % degree, rng) for i in range(family_size - 1)]
    ratios, by_degree = [], {}
    for i, phi in enumerate(family):
        I = induced_functional(model, phi, level=level, samples=samples)
        with np.errstate(divide="ignore"):
            on_sample = float(np.max(np.log(np.abs(_phi_values(phi, x_all, y_all))) - logw))
        s = sup_norm(phi, u1, u2, p1, p2, budget=sup_budget, seed=seed + i)
        log_sup = max(on_sample, math.log(s.value) if s.value > 0 else -math.inf)
        r = abs(I.value) / math.exp(log_sup) if np.isfinite(log_sup) else 0.0
        ratios.append(r)
        deg = phi.total_degree
        by_degree[deg] = max(by_degree.get(deg, 0.0), r)
    k_hat = max(ratios)
    worst = int(np.argmax(ratios))
    degs = sorted(by_degree)
    growing = len(degs) > 1 and all(by_degree[b] > 1.5 * by_degree[a] for a, b in zip(degs, degs[1:]))
    upper = integ.ci[1]
    ok = integ.converged and k_hat <= upper
    verdict = HOLDS if ok else FAILS
    return ProbeReport(verdict=verdict, value=k_hat, witness={"index": worst, "ratio": ratios[worst]},
                       details={"integral": integ.to_dict(), "K_hat_by_degree": {str(k): v for k, v in by_degree.items()},
                                "unbounded_heuristic": (not integ.converged) or growing,
                                "family_size": len(family)})


# --------------------------------------------------- omega

def omega_test_function(u1, u2, q1, q2, space):
    """``omega(x, y) = L_u1(<x,x>_{-q1}/16) L_u2(<y,y>_{-q2}/16)`` with the bilinear form.

    Returns a batch evaluator giving principal ``log omega``.
    """

    def log_omega(x, y):
        x = np.atleast_2d(np.asarray(x, dtype=complex))
        y = np.atleast_2d(np.asarray(y, dtype=complex))
        a = np.atleast_1d(l_function_complex(u1, space.bilinear(x, -q1) / 16.0))
        b = np.atleast_1d(l_function_complex(u2, space.bilinear(y, -q2) / 16.0))
        return a + b

    return log_omega


def omega_bound_check(u1, u2, q1, q2, space, n=1000, seed=0, scale=3.0):
    """Check ``|omega| <= (2e / log 2) u1(|x|^2_{-q1})^{1/2} u2(|y|^2_{-q2})^{1/2}`` at random points."""
    rng = np.random.default_rng(seed)
    d = space.d
    r = np.exp(rng.uniform(-3, math.log(scale) + 2, size=(n, 1)))
    x = r * (rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d)))
    y = r[::-1] * (rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d)))
    lo = omega_test_function(u1, u2, q1, q2, space)(x, y).real
    rhs = math.log(2 * math.e / math.log(2)) + 0.5 * u1(space.sqnorm(x, -q1)) + 0.5 * u2(space.sqnorm(y, -q2))
    gap = rhs - lo
    bad = np.flatnonzero(gap < -1e-12 * np.maximum(1.0, np.abs(rhs)))
    return ConditionReport(
        condition="omega-bound",
        verdict=FAILS if bad.size else HOLDS,
        witness=[{"x": x[i].tolist(), "y": y[i].tolist(), "gap": float(gap[i])} for i in bad[:5]],
        grid={"n_points": n, "seed": seed},
        margin=float(np.min(gap)),
    )


# --------------------------------------------------- positivity

def measure_to_chaos(nu1, nu2, space, L, M):
    """Chaos vector of ``nu1 x nu2`` up to degrees ``(L, M)``: ``F = E[x^a] E[y^b] / (l! m!)``.

    Its pairing with any test function of degrees within the caps equals the
    integral against the measure.
    """
    kernels = {}
    for l in range(L + 1):
        for m in range(M + 1):
            entries = {}
            for a, b in index_keys(space.d, l, m):
                ea = [a.count(j) for j in range(space.d)]
                eb = [b.count(j) for j in range(space.d)]
                c = nu1.moment(ea) * nu2.moment(eb) / (math.factorial(l) * math.factorial(m))
                if c != 0:
                    entries[(a, b)] = c
            if entries:
                kernels[(l, m)] = KernelTensor(l, m, space.d, entries)
    return ChaosVector(space, kernels)


def _nonneg_family(space, size, degree, rng, exp_order=4):
    """Constant 1, squares ``psi conj(psi)`` and truncated real exponentials.

    Each member is nonnegative at real points: ``|psi|^2`` trivially, and
    even-order Taylor truncations of ``exp`` are positive on the real line.
    """
    fam = [("one", ChaosVector.constant(space))]
    n_exp = max(1, size // 5)
    for i in range(size - 1 - n_exp):
        psi = random_chaos(space, 1 + i % degree, rng)
        fam.append((f"square[{i}]", multiply(psi, psi.conj())))
    for i in range(n_exp):
        xi, eta = rng.standard_normal(space.d) / 2, rng.standard_normal(space.d) / 2
        fam.append((f"exp[{i}]", exponential_vector(space, xi, eta, exp_order, exp_order)))
    return fam


def positivity_probe(Phi, family_size=100, degree=2, seed=0, n=20_000, n_batches=20, level=0.99,
                     rel_tol=1e-10):
    """Search for a nonnegative test function with a negative pairing.

    ``Phi`` is a chaos vector (exact pairings) or a ``ProductMeasureModel``
    (Monte-Carlo integrals, violation only if the upper confidence limit is
    negative).  "no-violation-found" is sound but not a proof of positivity.
    """
    space = Phi.space
    rng = np.random.default_rng(seed)
    family = _nonneg_family(space, family_size, degree, rng)
    values = []
    if isinstance(Phi, ProductMeasureModel):
        samples = _batched_samples(Phi, n, seed, n_batches)
        for name, phi in family:
            I = induced_functional(Phi, phi, level=level, samples=samples)
            values.append((name, I.value.real, I.value.real + I.half_width))
    else:
        for name, phi in family:
            v = pairing(Phi, phi)
            scale = max(1.0, abs(v))
            # an imaginary part is itself a violation of positivity
            upper = v.real if abs(v.imag) <= rel_tol * scale else -abs(v.imag)
            values.append((name, v.real, upper + rel_tol * scale))
    i = int(np.argmin([v[2] for v in values]))
    name, val, upper = values[i]
    verdict = NOT_POSITIVE if upper < 0 else NO_VIOLATION
    return ProbeReport(verdict=verdict, value=min(v[1] for v in values),
                       witness={"member": name, "value": val, "upper": upper} if verdict == NOT_POSITIVE else {},
                       details={"family_size": len(family)})


# --------------------------------------------------- pseudo-positivity

def _monomials(d, D):
    out = []
    for k in range(D + 1):
        for idx in index_keys(d, k, 0):
            out.append(tuple(idx[0].count(j) for j in range(d)))
    return out


def moment_matrix(nu1, nu2, D):
    """Measure-induced operator ``M = m2 m1^T`` on monomial coefficients of degree <= ``D``.

    ``c2^T M c1 = int phi1 dnu1 * int phi2 dnu2``.
    """
    basis = _monomials(nu1.d, D)
    m1 = np.array([nu1.moment(e) for e in basis])
    m2 = np.array([nu2.moment(e) for e in basis])
    return np.outer(m2, m1)


def _square_coeffs(basis, index, rng, half_degree):
    d = len(basis[0])
    small = [e for e in basis if sum(e) <= half_degree]
    c = rng.standard_normal(len(small))
    out = np.zeros(len(basis))
    for e1, a in zip(small, c):
        for e2, b in zip(small, c):
            out[index[tuple(i + j for i, j in zip(e1, e2))]] += a * b
    return out


def _exp_coeffs(basis, xi):
    """Monomial coefficients of the Taylor truncation of ``exp(<xi, x>)``."""
    out = np.zeros(len(basis))
    for k, e in enumerate(basis):
        out[k] = math.prod(x ** p / math.factorial(p) for x, p in zip(xi, e))
    return out


def pseudo_positivity_probe(Xi, d, D, family_size=100, seed=0, rel_tol=1e-10, cross_check=None):
    """Search for nonnegative ``phi1, phi2`` with ``c2^T Xi c1 < 0``.

    Coordinates are monomial coefficients of real polynomials on ``R^d`` of
    degree at most ``D`` (``D`` even).  ``cross_check`` may hold an
    ``IntegrabilityEstimate`` for the measure that induced ``Xi``; it is
    recorded alongside the verdict.
    """
    basis = _monomials(d, D)
    Xi = np.asarray(Xi, dtype=float)
    if Xi.shape != (len(basis), len(basis)):
        raise ValueError(f"operator shape {Xi.shape} does not match {len(basis)} monomials")
    if D % 2:
        raise ValueError("degree cap must be even")
    index = {e: i for i, e in enumerate(basis)}
    rng = np.random.default_rng(seed)
    fam = [("one", np.eye(len(basis))[0])]
    for i in range(family_size - 1):
        if i % 4 == 3:
            fam.append((f"exp[{i}]", _exp_coeffs(basis, rng.standard_normal(d) / 2)))
        else:
            fam.append((f"square[{i}]", _square_coeffs(basis, index, rng, D // 2)))
    C = np.stack([c for _, c in fam])
    B = C @ Xi @ C.T  # B[j, i] = <<Xi phi_i, phi_j>>
    scale = np.maximum(1.0, np.abs(B))
    j, i = np.unravel_index(int(np.argmin(B + rel_tol * scale)), B.shape)
    worst = float(B[j, i])
    verdict = NOT_POSITIVE if worst < -rel_tol * scale[j, i] else NO_VIOLATION
    details = {"pairs": int(B.size), "basis_size": len(basis)}
    if cross_check is not None:
        details["integrability"] = cross_check.to_dict()
        details["consistent"] = not (cross_check.converged and verdict == NOT_POSITIVE)
    return ProbeReport(verdict=verdict, value=worst,
                       witness={"phi1": fam[i][0], "phi2": fam[j][0], "value": worst} if verdict == NOT_POSITIVE else {},
                       details=details)
