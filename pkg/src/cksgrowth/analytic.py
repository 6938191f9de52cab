"""Taylor kernels of entire functions on ``C^d x C^d`` and their growth bounds.

Coefficients come from the trapezoidal rule on polycircles (a discrete
Cauchy integral).  Functions are evaluated in batches: an evaluator takes
``xi`` and ``eta`` of shape ``(n, d)`` and returns ``n`` complex values.
The first kernel block pairs with ``xi``; ``block_order="eta-first"``
swaps the blocks on output.
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np
from scipy import optimize

from . import _minimize
from .chaos import ChaosVector, KernelTensor, PreconditionError, log_ell_dual, multiplicity
from .growth import ConditionReport, FAILS, HOLDS
from .transforms import DivergentTransformError, dual_growth, legendre

__all__ = [
    "AnalyticFunction",
    "GrowthCertificate",
    "taylor_coeffs",
    "extract_all",
    "optimal_radius",
    "check_growth_condition",
    "verify_kernel_bounds",
    "reconstruct_chaos",
]


@dataclass(frozen=True, eq=False)
class AnalyticFunction:
    """Batch evaluator ``F(xi, eta)`` plus an optional claimed growth profile.

    ``profile`` keys, all optional: ``C, K1, K2, p1, p2, u1, u2``.
    The evaluator may be called concurrently and must not keep state.
    """

    d: int
    evaluator: object
    profile: dict = field(default_factory=dict)

    def __call__(self, xi, eta):
        xi = np.atleast_2d(np.asarray(xi, dtype=complex))
        eta = np.atleast_2d(np.asarray(eta, dtype=complex))
        out = np.asarray(self.evaluator(xi, eta), dtype=complex)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("evaluator returned non-finite values")
        return out

    @classmethod
    def from_chaos_s_transform(cls, Phi, **profile):
        from .chaos import s_transform
        return cls(Phi.space.d, lambda xi, eta: s_transform(Phi, xi, eta), profile)

    @classmethod
    def from_polynomial(cls, d, terms, **profile):
        """Polynomial ``sum c * prod xi[idx_l] * prod eta[idx_m]`` from serialized terms."""
        parsed = [(tuple(t["idx_l"]), tuple(t["idx_m"]), complex(t["re"], t.get("im", 0.0)))
                  for t in terms]
        for a, b, _ in parsed:
            if any(i < 0 or i >= d for i in a + b):
                raise ValueError(f"term index out of range for d={d}: {a}, {b}")

        def F(xi, eta):
            out = np.zeros(xi.shape[0], dtype=complex)
            for a, b, c in parsed:
                v = np.full(xi.shape[0], c, dtype=complex)
                for i in a:
                    v = v * xi[:, i]
                for j in b:
                    v = v * eta[:, j]
                out += v
            return out

        return cls(d, F, profile)


def _radius_vector(radii, d):
    r = np.broadcast_to(np.asarray(1.0 if radii is None else radii, dtype=float), (2 * d,))
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    return r


def _extract_support(F, support, caps, radii, nodes):
    """Monomial coefficients whose exponents are positive exactly on ``support``.

    Returns ``{exponent tuple over 2d variables: coefficient}`` for exponents
    ``1..caps[i]`` in each active variable.
    """
    d = F.d
    k = len(support)
    omega = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    grids = np.meshgrid(*([np.arange(nodes)] * k), indexing="ij")
    z = np.zeros((nodes ** k, 2 * d), dtype=complex)
    for g, v in zip(grids, support):
        z[:, v] = radii[v] * omega[g.ravel()]
    vals = F(z[:, :d], z[:, d:]).reshape((nodes,) * k)
    coef = np.fft.fftn(vals) / nodes ** k
    coef = coef[tuple(slice(1, c + 1) for c in caps)]
    for axis, v in enumerate(support):
        shape = [1] * k
        shape[axis] = caps[axis]
        coef = coef / radii[v] ** np.arange(1, caps[axis] + 1).reshape(shape)
    out = {}
    for pos in np.ndindex(coef.shape):
        e_full = [0] * (2 * d)
        for v, e in zip(support, pos):
            e_full[v] = e + 1
        out[tuple(e_full)] = coef[pos]
    return out


def extract_all(F, L, M, radii=None, nodes=None):
    """Monomial coefficients of ``F`` up to degree ``L`` in ``xi`` and ``M`` in ``eta``.

    The rule is tensorized over the active variables of each monomial only;
    the rest stay at 0.  With ``nodes`` points per circle, polynomials of
    degree below ``nodes`` in each variable are recovered exactly.
    """
    d = F.d
    if nodes is None:
        nodes = 4 * (max(L, M) + 1)
    if nodes < 2 * max(L, M) + 2:
        raise ValueError(f"need at least {2 * max(L, M) + 2} nodes per circle")
    r = _radius_vector(radii, d)
    out = {tuple([0] * (2 * d)): complex(F(np.zeros((1, d)), np.zeros((1, d)))[0])}
    xs, ys = range(d), range(d, 2 * d)
    for kx in range(0, min(L, d) + 1):
        for ky in range(0, min(M, d) + 1):
            if kx + ky == 0:
                continue
            for sx in itertools.combinations(xs, kx):
                for sy in itertools.combinations(ys, ky):
                    caps = [L - kx + 1] * kx + [M - ky + 1] * ky
                    coeffs = _extract_support(F, sx + sy, caps, r, nodes)
                    for e, c in coeffs.items():
                        if sum(e[:d]) <= L and sum(e[d:]) <= M:
                            out[e] = c
    return out


def _kernel_from_monomials(mono, d, l, m):
    entries = {}
    for e, c in mono.items():
        if sum(e[:d]) != l or sum(e[d:]) != m:
            continue
        a = tuple(i for i in range(d) for _ in range(e[i]))
        b = tuple(j for j in range(d) for _ in range(e[d + j]))
        entries[(a, b)] = c / (multiplicity(a) * multiplicity(b))
    return KernelTensor(l, m, d, entries)


def taylor_coeffs(F, l, m, radii=None, nodes=None, block_order="xi-first"):
    """Degree-``(l, m)`` kernel of ``F``'s power series.

    ``radii`` is a scalar, a length-``2d`` array, or ``"optimal"`` to use the
    Cauchy-estimate radius of the claimed growth profile for degree ``l+m``.
    """
    if isinstance(radii, str):
        if radii != "optimal":
            raise ValueError(f"unknown radius policy {radii!r}")
        radii = _profile_radius(F, l + m)
    if nodes is None:
        nodes = 4 * (max(l, m) + 1)
    mono = extract_all(F, l, m, radii, nodes)
    k = _kernel_from_monomials(mono, F.d, l, m)
    return k.swap_blocks() if block_order == "eta-first" else k


def _profile_radius(F, n):
    prof = F.profile
    if not prof or "u1" not in prof or n == 0:
        return 1.0
    u = prof["u1"]
    return optimal_radius(dual_growth(u), prof.get("K1", 1.0), n)


# ------------------------------------------------------------ radius

def optimal_radius(u_star, K, n, return_bound=False):
    """Minimizer of ``u*(K n^2 r^2)^{1/2} / r^n`` over ``r > 0``.

    With ``return_bound`` also returns the Cauchy bound
    ``min / n! = K^{n/2} (n^n/n!) l_{u*}(n)^{1/2}``.
    """
    if n < 1:
        raise ValueError("degree must be >= 1")
    c = math.log(K * n * n)

    def f(x, rows):
        return 0.5 * u_star(np.exp(c + 2.0 * x)) - n * x

    unimodal = u_star.claims("log-exp-convex")
    x, fmin, status = _minimize.bracketed_minimize(f, 1, unimodal=unimodal)
    if status[0] != _minimize.OK or not np.isfinite(fmin[0]):
        raise DivergentTransformError([n])
    r = float(math.exp(x[0]))
    if return_bound:
        return r, math.exp(float(fmin[0]) - math.lgamma(n + 1))
    return r


# ------------------------------------------------------------ growth

@dataclass
class GrowthCertificate:
    """Largest observed ``|F|^2 / weight`` over a sample cloud."""

    C_hat: float
    log_C_hat: float
    argmax: tuple
    verdict: str
    witnesses: list
    sample: dict

    @property
    def holds(self):
        return self.verdict == HOLDS


def _weight_fns(u1, u2, p1, p2, direction):
    if direction == "dual":
        w1, w2, s1, s2 = dual_growth(u1), dual_growth(u2), p1, p2
    elif direction == "primal":
        w1, w2, s1, s2 = u1, u2, -p1, -p2
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return w1, w2, s1, s2


def check_growth_condition(F, u1, u2, K1, K2, p1, p2, space, direction="dual",
                           claimed_C=None, n_dirs=64, radii=None, seed=0, polish=4):
    """Measure ``C_hat = sup |F|^2 / (w1(K1 |xi|^2_s1) w2(K2 |eta|^2_s2))`` on a cloud.

    ``dual`` uses the dual growth functions with ``s_i = p_i``;
    ``primal`` uses ``u_i`` themselves with ``s_i = -p_i``.  A maximum at the
    outer radius that keeps increasing outward is reported as a failure.
    """
    w1, w2, s1, s2 = _weight_fns(u1, u2, p1, p2, direction)
    d = space.d
    rng = np.random.default_rng(seed)
    if radii is None:
        radii = np.concatenate([[0.0], np.geomspace(1e-3, 1e2, 41)])
    radii = np.asarray(radii, dtype=float)

    def logratio(xi, eta):
        with np.errstate(all="ignore"):
            f = np.asarray(F.evaluator(np.atleast_2d(xi), np.atleast_2d(eta)), dtype=complex)
            v = 2.0 * np.log(np.abs(f))
            v = v - w1(K1 * space.sqnorm(xi, s1)) - w2(K2 * space.sqnorm(eta, s2))
        # overflow of F is growth beyond any weight we can represent
        return np.where(np.isnan(v) | (v == np.inf), np.inf, v)

    def unit(z, s):
        return z / np.sqrt(space.sqnorm(z, s))[:, None]

    eye = np.eye(d, dtype=complex)
    dx = np.concatenate([eye, eye,
                         rng.standard_normal((n_dirs, d)) + 1j * rng.standard_normal((n_dirs, d))])
    dy = np.concatenate([eye, np.roll(eye, 1, axis=0),
                         rng.standard_normal((n_dirs, d)) + 1j * rng.standard_normal((n_dirs, d))])
    dx, dy = unit(dx, s1), unit(dy, s2)
    S, T = np.meshgrid(radii, radii, indexing="ij")
    S, T = S.ravel(), T.ravel()
    best = (-np.inf, None, None)
    witnesses = []
    edge_growth = False
    log_claim = None if claimed_C is None else math.log(claimed_C)
    for ux, uy in zip(dx, dy):
        xi = S[:, None] * ux[None, :]
        eta = T[:, None] * uy[None, :]
        v = logratio(xi, eta)
        i = int(np.nanargmax(v))
        if v[i] > best[0]:
            best = (float(v[i]), xi[i], eta[i])
        if not np.isfinite(v[i]):
            edge_growth = True
            witnesses.append({"xi": _cplx(xi[i]), "eta": _cplx(eta[i]), "log_ratio": "inf"})
        elif S[i] == radii[-1] or T[i] == radii[-1]:
            f2 = 2.0 if S[i] == radii[-1] else 1.0
            g2 = 2.0 if T[i] == radii[-1] else 1.0
            vo = logratio(xi[i:i + 1] * f2, eta[i:i + 1] * g2)[0]
            if vo > v[i]:
                edge_growth = True
                witnesses.append({"xi": _cplx(xi[i] * f2), "eta": _cplx(eta[i] * g2),
                                  "log_ratio": float(vo)})
        if log_claim is not None:
            bad = np.flatnonzero(v > log_claim)
            for j in bad[:2]:
                witnesses.append({"xi": _cplx(xi[j]), "eta": _cplx(eta[j]), "log_ratio": float(v[j])})

    def neg(params):
        xi = (params[:d] + 1j * params[d:2 * d])[None, :]
        eta = (params[2 * d:3 * d] + 1j * params[3 * d:])[None, :]
        val = logratio(xi, eta)[0]
        return -val if np.isfinite(val) else 1e300

    if not edge_growth and polish:
        x0 = np.concatenate([best[1].real, best[1].imag, best[2].real, best[2].imag])
        res = optimize.minimize(neg, x0, method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 2000 * d})
        if -res.fun > best[0]:
            best = (-res.fun, res.x[:d] + 1j * res.x[d:2 * d], res.x[2 * d:3 * d] + 1j * res.x[3 * d:])

    log_c = best[0]
    if edge_growth:
        verdict = FAILS
    elif log_claim is not None and log_c > log_claim:
        verdict = FAILS
    else:
        verdict = HOLDS
    return GrowthCertificate(
        C_hat=math.exp(log_c) if log_c < 700 else math.inf,
        log_C_hat=log_c,
        argmax=(best[1], best[2]),
        verdict=verdict,
        witnesses=witnesses,
        sample={"directions": int(len(dx)), "radii": [float(radii[0]), float(radii[-1]), len(radii)],
                "seed": seed, "direction": direction, "unbounded_on_cloud": edge_growth},
    )


def _cplx(z):
    return [[float(v.real), float(v.imag)] for v in np.atleast_1d(z)]


# ------------------------------------------------------- kernel bounds

def verify_kernel_bounds(kernels, space, C, K1, K2, p1, p2, q1, q2, u1, u2,
                         direction="dual", atol=1e-12):
    """Check ``|k_{l,m}|^2 <= C (K1 e^2 hs1)^l (K2 e^2 hs2)^m w1(l) w2(m)`` per bidegree.

    ``dual``: norm ``|.|_{-q1,-q2}`` with ``q_i > p_i``, ``hs_i = hs(q_i, p_i)``
    and ``w_i`` the Legendre values of the dual functions.
    ``primal``: norm ``|.|_{q1,q2}`` with ``q_i < p_i``, ``hs_i = hs(p_i, q_i)``
    and ``w_i = l_{u_i}``.  ``C`` bounds ``|F|^2``, so it enters unsquared.
    """
    if direction == "dual":
        if not (q1 > p1 and q2 > p2):
            raise PreconditionError("dual direction needs q_i > p_i")
        n1, n2 = -q1, -q2
        hs1, hs2 = space.hs_norm(q1, p1), space.hs_norm(q2, p2)
        ell1 = lambda n: log_ell_dual(u1, n)
        ell2 = lambda n: log_ell_dual(u2, n)
    elif direction == "primal":
        if not (q1 < p1 and q2 < p2):
            raise PreconditionError("primal direction needs q_i < p_i")
        n1, n2 = q1, q2
        hs1, hs2 = space.hs_norm(p1, q1), space.hs_norm(p2, q2)
        ell1 = lambda n: legendre(u1, n)
        ell2 = lambda n: legendre(u2, n)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    g1 = math.log(K1 * math.e ** 2 * hs1)
    g2 = math.log(K2 * math.e ** 2 * hs2)
    logC = math.log(C) if C > 0 else -math.inf
    rows, witnesses = [], []
    margin = math.inf
    for k in kernels:
        sq = k.sqnorm(space, n1, n2)
        lhs = math.log(sq) if sq > 0 else -math.inf
        rhs = logC + k.l * g1 + k.m * g2 + float(ell1(float(k.l))) + float(ell2(float(k.m)))
        gap = rhs - lhs
        rows.append({"l": k.l, "m": k.m, "log_lhs": lhs, "log_rhs": rhs, "margin": gap})
        margin = min(margin, gap)
        if lhs > rhs + atol * max(1.0, abs(rhs)):
            witnesses.append({"l": k.l, "m": k.m, "log_lhs": lhs, "log_rhs": rhs})
    verdict = FAILS if witnesses else HOLDS
    return ConditionReport(
        condition=f"kernel-bound-{direction}",
        verdict=verdict,
        witness=witnesses,
        grid={"bidegrees": [(k.l, k.m) for k in kernels]},
        margin=margin,
        details={"rows": rows, "C": C, "K": [K1, K2], "p": [p1, p2], "q": [q1, q2],
                 "hs": [hs1, hs2], "summable": [K1 * math.e ** 2 * hs1 < 1, K2 * math.e ** 2 * hs2 < 1]},
    )


# ------------------------------------------------------- inverse S

def reconstruct_chaos(F, L, M, space, radii=None, nodes=None, rtol=1e-12):
    """Chaos vector whose S-transform is ``F`` truncated to degrees ``(L, M)``.

    Extracted kernels are divided by ``2^{(l+m)/2}``.  Entries below
    ``rtol`` times the largest extracted coefficient are quadrature noise
    and are dropped.
    """
    if space.d != F.d:
        raise ValueError("space dimension does not match the function")
    mono = extract_all(F, L, M, radii, nodes)
    tol = rtol * max((abs(c) for c in mono.values()), default=0.0)
    kernels = {}
    for l in range(L + 1):
        for m in range(M + 1):
            k = _kernel_from_monomials(mono, F.d, l, m).scale(2.0 ** (-0.5 * (l + m)))
            e = {key: v for key, v in k.entries.items() if abs(v) > tol}
            if e:
                kernels[(l, m)] = KernelTensor(l, m, F.d, e)
    return ChaosVector(space, kernels)
