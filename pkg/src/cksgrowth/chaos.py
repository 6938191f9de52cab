"""Finite-dimensional chaos vectors on the complex Gaussian space.

A chaos vector is a finite family of symmetric kernels ``f_{l,m}``; the
first ``l`` tensor slots pair with the variable ``x`` and the last ``m`` with
``y``.  Kernels are stored sparsely by sorted multi-index (one entry per
index class) so symmetry holds by construction; the multiplicity of a key
is the number of distinct permutations it stands for.

A chaos vector is evaluated as the polynomial

    phi(x, y) = sum_{l,m} <f_{l,m}, x^{(x)l} (x) y^{(x)m}>

in independent complex arguments.  Under the complex Gaussian with
``E[z_j conj(z_k)] = delta_jk`` these monomials are orthogonal, which gives
``||phi||^2 = sum l! m! |f_{l,m}|_0^2``.
"""

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
import itertools
import math
import warnings

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy import optimize

from .transforms import legendre, legendre_of_dual, dual_growth

__all__ = [
    "SpaceModel",
    "KernelTensor",
    "ChaosVector",
    "PreconditionError",
    "SupNormEstimate",
    "multiplicity",
    "index_keys",
    "random_chaos",
    "norm_test",
    "norm_dual",
    "log_ell_dual",
    "pairing",
    "pairing_bound",
    "evaluate",
    "sup_norm",
    "exponential_vector",
    "s_transform",
    "s_transform_integral",
    "gaussian_constant_L",
    "norm_equivalence_experiment",
    "to_monomials",
    "from_monomials",
    "multiply",
    "to_json",
    "from_json",
]


class PreconditionError(ValueError):
    """An operation was called outside its stated preconditions."""


@dataclass(frozen=True)
class SpaceModel:
    """Diagonal space scale: ``A e_j = lam_j e_j`` on ``C^d``."""

    lam: tuple

    def __post_init__(self):
        lam = tuple(float(v) for v in np.atleast_1d(self.lam))
        if not lam:
            raise ValueError("need at least one eigenvalue")
        if any(v <= 1.0 for v in lam):
            raise ValueError("eigenvalues must exceed 1")
        if any(b < a for a, b in zip(lam, lam[1:])):
            raise ValueError("eigenvalues must be nondecreasing")
        object.__setattr__(self, "lam", lam)

    @property
    def d(self):
        return len(self.lam)

    @property
    def rho(self):
        return 1.0 / self.lam[0]

    @property
    def lam_array(self):
        return np.asarray(self.lam)

    def hs_norm(self, q, p):
        """Squared Hilbert-Schmidt norm of ``E_q -> E_p``: ``sum lam^{-2(q-p)}``."""
        return float(np.sum(self.lam_array ** (-2.0 * (q - p))))

    def weights(self, p):
        return self.lam_array ** (2.0 * p)

    def sqnorm(self, x, p):
        """``|x|_p^2 = sum lam^{2p} |x_j|^2`` over the last axis."""
        x = np.asarray(x)
        return np.sum(self.weights(p) * np.abs(x) ** 2, axis=-1)

    def bilinear(self, x, p):
        """Complex bilinear ``<x, x>_p = sum lam^{2p} x_j^2``."""
        x = np.asarray(x)
        return np.sum(self.weights(p) * x * x, axis=-1)

    def to_dict(self):
        return {"d": self.d, "lambda": list(self.lam)}


@lru_cache(maxsize=None)
def multiplicity(idx):
    """Number of distinct orderings of a sorted multi-index."""
    out = math.factorial(len(idx))
    for c in Counter(idx).values():
        out //= math.factorial(c)
    return out


@lru_cache(maxsize=None)
def index_keys(d, l, m):
    return tuple(
        (a, b)
        for a in itertools.combinations_with_replacement(range(d), l)
        for b in itertools.combinations_with_replacement(range(d), m)
    )


@dataclass(frozen=True, eq=False)
class KernelTensor:
    """Symmetric (within each block) kernel of bidegree ``(l, m)``."""

    l: int
    m: int
    d: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (a, b), c in self.entries.items():
            a, b = tuple(sorted(int(i) for i in a)), tuple(sorted(int(i) for i in b))
            if len(a) != self.l or len(b) != self.m:
                raise ValueError(f"key {(a, b)} does not match bidegree {(self.l, self.m)}")
            if any(i < 0 or i >= self.d for i in a + b):
                raise ValueError(f"index out of range in {(a, b)}")
            clean[(a, b)] = complex(c)
        object.__setattr__(self, "entries", clean)

    @staticmethod
    def mult(key):
        return multiplicity(key[0]) * multiplicity(key[1])

    def sqnorm(self, space, p1=0.0, p2=0.0):
        """``|(A^p1)^{(x)l} (x) (A^p2)^{(x)m} kappa|_0^2``."""
        w1, w2 = space.weights(p1), space.weights(p2)
        total = 0.0
        for key, c in self.entries.items():
            w = self.mult(key) * abs(c) ** 2
            for i in key[0]:
                w *= w1[i]
            for j in key[1]:
                w *= w2[j]
            total += w
        return total

    def contract(self, other):
        """Bilinear (non-conjugating) full contraction with another kernel."""
        if (self.l, self.m) != (other.l, other.m):
            return 0j
        small, big = (self, other) if len(self.entries) <= len(other.entries) else (other, self)
        return sum((self.mult(k) * c * big.entries[k] for k, c in small.entries.items()
                    if k in big.entries), 0j)

    def evaluate(self, x, y):
        """``<kappa, x^{(x)l} (x) y^{(x)m}>`` for batches ``x, y`` of shape ``(n, d)``."""
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        out = np.zeros(x.shape[0], dtype=complex)
        for (a, b), c in self.entries.items():
            term = np.full(x.shape[0], self.mult((a, b)) * c, dtype=complex)
            for i in a:
                term = term * x[:, i]
            for j in b:
                term = term * y[:, j]
            out += term
        return out

    def scale(self, c):
        return KernelTensor(self.l, self.m, self.d, {k: c * v for k, v in self.entries.items()})

    def conj(self):
        return KernelTensor(self.l, self.m, self.d, {k: v.conjugate() for k, v in self.entries.items()})

    def swap_blocks(self):
        """Kernel with the two blocks exchanged, bidegree ``(m, l)``."""
        return KernelTensor(self.m, self.l, self.d, {(b, a): v for (a, b), v in self.entries.items()})

    def to_dense(self):
        shape = (self.d,) * (self.l + self.m)
        out = np.zeros(shape, dtype=complex)
        for (a, b), c in self.entries.items():
            for pa in set(itertools.permutations(a)):
                for pb in set(itertools.permutations(b)):
                    out[pa + pb] = c
        return out

    @classmethod
    def from_dense(cls, arr, l, m):
        """Project a dense tensor onto block-symmetric kernels by averaging."""
        arr = np.asarray(arr, dtype=complex)
        d = arr.shape[0] if arr.ndim else 1
        entries = {}
        for a, b in index_keys(d, l, m):
            vals = [arr[pa + pb] for pa in set(itertools.permutations(a))
                    for pb in set(itertools.permutations(b))]
            v = complex(np.mean(vals))
            if v != 0:
                entries[(a, b)] = v
        return cls(l, m, d, entries)


@dataclass(frozen=True, eq=False)
class ChaosVector:
    """Finitely supported chaos expansion ``{(l, m): f_{l,m}}``."""

    space: SpaceModel
    kernels: dict = field(default_factory=dict)

    def __post_init__(self):
        for (l, m), k in self.kernels.items():
            if (k.l, k.m) != (l, m) or k.d != self.space.d:
                raise ValueError(f"kernel at {(l, m)} does not match its slot or the space")

    @classmethod
    def constant(cls, space, c=1.0):
        return cls(space, {(0, 0): KernelTensor(0, 0, space.d, {((), ()): c})})

    @classmethod
    def single(cls, space, l, m, entries):
        return cls(space, {(l, m): KernelTensor(l, m, space.d, entries)})

    @property
    def max_degrees(self):
        if not self.kernels:
            return (0, 0)
        return (max(l for l, _ in self.kernels), max(m for _, m in self.kernels))

    @property
    def total_degree(self):
        return max((l + m for l, m in self.kernels), default=0)

    def scale(self, c):
        return ChaosVector(self.space, {k: v.scale(c) for k, v in self.kernels.items()})

    def conj(self):
        return ChaosVector(self.space, {k: v.conj() for k, v in self.kernels.items()})

    def __add__(self, other):
        _check_space(self, other)
        out = dict(self.kernels)
        for key, k in other.kernels.items():
            if key in out:
                e = dict(out[key].entries)
                for kk, v in k.entries.items():
                    e[kk] = e.get(kk, 0j) + v
                out[key] = KernelTensor(k.l, k.m, k.d, e)
            else:
                out[key] = k
        return ChaosVector(self.space, out)

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def l2_norm(self):
        """``sqrt(sum l! m! |f_{l,m}|_0^2)``."""
        s = sum(math.factorial(l) * math.factorial(m) * k.sqnorm(self.space)
                for (l, m), k in self.kernels.items())
        return math.sqrt(s)

    def __call__(self, x, y):
        return evaluate(self, x, y)


def _check_space(a, b):
    if a.space != b.space:
        raise ValueError("chaos vectors live on different space models")


def random_chaos(space, degree, rng, bidegrees=None):
    """Random chaos vector with all bidegrees ``l + m <= degree``.

    Coefficients are complex standard normal scaled by
    ``1/sqrt(l! m! #entries)`` so norms stay O(1) across degrees.
    """
    if bidegrees is None:
        bidegrees = [(l, m) for l in range(degree + 1) for m in range(degree + 1 - l)]
    kernels = {}
    for l, m in bidegrees:
        keys = index_keys(space.d, l, m)
        z = (rng.standard_normal(len(keys)) + 1j * rng.standard_normal(len(keys))) / math.sqrt(2.0)
        z /= math.sqrt(math.factorial(l) * math.factorial(m) * len(keys))
        kernels[(l, m)] = KernelTensor(l, m, space.d, dict(zip(keys, z)))
    return ChaosVector(space, kernels)


# ---------------------------------------------------------------- norms

def _log_ell_table(u, degrees):
    n = np.arange(max(degrees, default=0) + 1, dtype=float)
    return np.asarray(legendre(u, n), dtype=float)


def log_ell_dual(u, n):
    """``log l_{u*}(n)``: closed form for (log, x^2)-convex ``u``, else numeric."""
    if u.claims("U3") or u.claims("log-x2-convex"):
        return legendre_of_dual(u, n)
    return legendre(dual_growth(u), n, method="numeric")


def _weighted_norm(phi, p1, p2, log_ell1, log_ell2):
    logs = []
    for (l, m), k in phi.kernels.items():
        sq = k.sqnorm(phi.space, p1, p2)
        if sq > 0:
            logs.append(math.log(sq) - log_ell1[l] - log_ell2[m])
    if not logs:
        return 0.0
    return math.exp(0.5 * logsumexp(logs))


def norm_test(phi, u1, u2, p1, p2):
    """``||phi||_{p1,p2}``: kernels weighted by ``1 / (l_u1(l) l_u2(m))``."""
    L, M = phi.max_degrees
    return _weighted_norm(phi, p1, p2, _log_ell_table(u1, [L]), _log_ell_table(u2, [M]))


def norm_dual(Phi, u1, u2, p1, p2):
    """``||Phi||_{-p1,-p2}`` with weights ``1 / (l_{u1*}(l) l_{u2*}(m))``."""
    L, M = Phi.max_degrees
    e1 = np.asarray(log_ell_dual(u1, np.arange(L + 1, dtype=float)))
    e2 = np.asarray(log_ell_dual(u2, np.arange(M + 1, dtype=float)))
    return _weighted_norm(Phi, -p1, -p2, e1, e2)


def pairing(Phi, phi):
    """``<<Phi, phi>> = sum l! m! <F_{l,m}, f_{l,m}>`` (bilinear)."""
    _check_space(Phi, phi)
    total = 0j
    for key, F in Phi.kernels.items():
        f = phi.kernels.get(key)
        if f is not None:
            total += math.factorial(key[0]) * math.factorial(key[1]) * F.contract(f)
    return total


def pairing_bound(Phi, phi, u1, u2, p1, p2):
    """Cauchy-Schwarz bound for ``|<<Phi, phi>>|`` with the exact dual weight.

    Returns ``(exact_bound, ratio)`` where ``exact_bound`` pairs
    ``sqrt(sum (l! m!)^2 l_u1(l) l_u2(m) |F|^2_{-p})`` with ``norm_test(phi)``,
    and ``ratio`` is ``|pairing| / (norm_dual(Phi) * norm_test(phi))``, the
    quantity the weight ``1/(l_{u1*} l_{u2*})`` would have to keep below 1.
    """
    L = max(Phi.max_degrees[0], phi.max_degrees[0])
    M = max(Phi.max_degrees[1], phi.max_degrees[1])
    e1, e2 = _log_ell_table(u1, [L]), _log_ell_table(u2, [M])
    logs = []
    for (l, m), k in Phi.kernels.items():
        sq = k.sqnorm(Phi.space, -p1, -p2)
        if sq > 0:
            logs.append(math.log(sq) + 2 * (gammaln(l + 1) + gammaln(m + 1)) + e1[l] + e2[m])
    dual_exact = math.exp(0.5 * logsumexp(logs)) if logs else 0.0
    test = norm_test(phi, u1, u2, p1, p2)
    bound = dual_exact * test
    denom = norm_dual(Phi, u1, u2, p1, p2) * test
    ratio = abs(pairing(Phi, phi)) / denom if denom > 0 else 0.0
    return bound, ratio


def evaluate(phi, x, y):
    """Polynomial value ``phi(x, y)``; ``x, y`` of shape ``(d,)`` or ``(n, d)``."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    y2 = np.atleast_2d(y)
    if x2.shape[0] != y2.shape[0]:
        x2, y2 = np.broadcast_arrays(x2, y2)
    out = np.zeros(x2.shape[0], dtype=complex)
    for k in phi.kernels.values():
        out += k.evaluate(x2, y2)
    return complex(out[0]) if single else out


# ------------------------------------------------------------- exponentials

def exponential_vector(space, xi, eta, L, M):
    """Kernels ``(sqrt 2)^{l+m} / (l! m!) xi^{(x)l} (x) eta^{(x)m}``, ``l <= L, m <= M``."""
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    kernels = {}
    for l in range(L + 1):
        for m in range(M + 1):
            scale = math.sqrt(2.0) ** (l + m) / (math.factorial(l) * math.factorial(m))
            entries = {}
            for a, b in index_keys(space.d, l, m):
                c = scale * np.prod(xi[list(a)]) * np.prod(eta[list(b)])
                if c != 0:
                    entries[(a, b)] = c
            kernels[(l, m)] = KernelTensor(l, m, space.d, entries)
    return ChaosVector(space, kernels)


def _s_scaled(Phi):
    return ChaosVector(Phi.space, {(l, m): k.scale(2.0 ** (0.5 * (l + m)))
                                   for (l, m), k in Phi.kernels.items()})


def s_transform(Phi, xi, eta):
    """Multiple S-transform ``sum 2^{(l+m)/2} <F_{l,m}, xi^{(x)l} (x) eta^{(x)m}>``.

    Equal to ``pairing(Phi, exponential_vector(xi, eta))`` whenever the
    exponential vector's cutoffs cover the degrees of ``Phi``.
    """
    return evaluate(_s_scaled(Phi), xi, eta)


def _complex_gauss_nodes(d, order):
    """Tensor Gauss-Hermite rule for ``z in C^d`` with Re, Im ~ N(0, 1/2)."""
    t, w = np.polynomial.hermite.hermgauss(order)
    w = w / math.sqrt(math.pi)
    grids = np.meshgrid(*([t] * (2 * d)), indexing="ij")
    wgrids = np.meshgrid(*([w] * (2 * d)), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    z = pts[:, :d] + 1j * pts[:, d:]
    return z, wts


def s_transform_integral(phi, xi, eta, order=None):
    """S-transform from the Gaussian integral ``E phi(x + sqrt2 xi, y + sqrt2 eta)``.

    Both ``x`` and ``y`` are complex Gaussian vectors with real and
    imaginary parts of variance 1/2; the integral is a tensor Gauss-Hermite
    rule, exact when ``order >= degree/2 + 1``.
    """
    deg = phi.total_degree
    need = deg // 2 + 1
    if order is None:
        order = need
    elif order < need:
        warnings.warn(f"quadrature order {order} below {need}: not exact for degree {deg}",
                      RuntimeWarning, stacklevel=2)
    d = phi.space.d
    z, w = _complex_gauss_nodes(d, order)
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    s2 = math.sqrt(2.0)
    total = 0j
    for zy, wy in zip(z, w):
        vals = evaluate(phi, z + s2 * xi, np.broadcast_to(zy + s2 * eta, z.shape))
        total += wy * np.dot(w, vals)
    return complex(total)


def gaussian_constant_L(u1, u2, q1, q2, space, order=None):
    """``E[u1(4|x|^2_{-q1})^{1/2}] E[u2(4|y|^2_{-q2})^{1/2}]`` under the complex Gaussian."""
    if order is None:
        order = {1: 64, 2: 24}.get(space.d, 8)
    z, w = _complex_gauss_nodes(space.d, order)
    out = 1.0
    for u, q in ((u1, q1), (u2, q2)):
        r = 4.0 * space.sqnorm(z, -q)
        out *= float(np.dot(w, np.exp(0.5 * u(r))))
    return out


# ---------------------------------------------------------------- sup norm

@dataclass
class SupNormEstimate:
    """Best value found for the weighted supremum; a lower bound on the true sup."""

    value: float
    x: np.ndarray
    y: np.ndarray
    n_evaluations: int = 0


def _log_weighted(phi, u1, u2, p1, p2, x, y):
    v = np.abs(evaluate(phi, x, y))
    with np.errstate(divide="ignore"):
        lv = np.log(v)
    return lv - 0.5 * u1(phi.space.sqnorm(x, -p1)) - 0.5 * u2(phi.space.sqnorm(y, -p2))


def _unit(z, space, p):
    n = np.sqrt(space.sqnorm(z, -p))[..., None]
    return z / np.where(n == 0, 1.0, n)


def sup_norm(phi, u1, u2, p1, p2, budget=32, seed=0, radii=None, polish=4):
    """Weighted supremum ``sup |phi(x,y)| u1(|x|^2_{-p1})^{-1/2} u2(|y|^2_{-p2})^{-1/2}``.

    Random complex directions with a two-parameter radial scan, then
    Nelder-Mead polishing of the best starts.  The result is a lower bound.
    """
    space = phi.space
    d = space.d
    rng = np.random.default_rng(seed)
    if radii is None:
        radii = np.concatenate([[0.0], np.geomspace(1e-2, 1e3, 48)])
    dirs_x = (rng.standard_normal((budget, d)) + 1j * rng.standard_normal((budget, d)))
    dirs_y = (rng.standard_normal((budget, d)) + 1j * rng.standard_normal((budget, d)))
    eye = np.eye(d, dtype=complex)
    dirs_x = _unit(np.concatenate([eye, dirs_x]), space, p1)
    dirs_y = _unit(np.concatenate([eye, dirs_y]), space, p2)
    S, T = np.meshgrid(radii, radii, indexing="ij")
    S, T = S.ravel(), T.ravel()
    starts = []
    n_eval = 0
    for dx, dy in zip(dirs_x, dirs_y):
        x = S[:, None] * dx[None, :]
        y = T[:, None] * dy[None, :]
        v = _log_weighted(phi, u1, u2, p1, p2, x, y)
        n_eval += v.size
        i = int(np.argmax(v))
        starts.append((float(v[i]), x[i], y[i]))
    starts.sort(key=lambda s: -s[0])
    best_v, best_x, best_y = starts[0]

    def neg(params):
        x = params[:d] + 1j * params[d:2 * d]
        y = params[2 * d:3 * d] + 1j * params[3 * d:]
        val = _log_weighted(phi, u1, u2, p1, p2, x[None, :], y[None, :])[0]
        return -val if np.isfinite(val) else 1e300

    for v0, x0, y0 in starts[:polish]:
        p0 = np.concatenate([x0.real, x0.imag, y0.real, y0.imag])
        res = optimize.minimize(neg, p0, method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000 * d})
        n_eval += res.nfev
        if -res.fun > best_v:
            best_v = -res.fun
            best_x = res.x[:d] + 1j * res.x[d:2 * d]
            best_y = res.x[2 * d:3 * d] + 1j * res.x[3 * d:]
    return SupNormEstimate(value=math.exp(best_v) if np.isfinite(best_v) else 0.0,
                           x=np.asarray(best_x), y=np.asarray(best_y), n_evaluations=n_eval)


# ------------------------------------------------------ norm equivalence

def _sup_by_norm_constant(space, p, q):
    a = space.rho ** (-2.0 * (q - p))
    return math.sqrt(math.e * a / math.log(a))


def norm_equivalence_experiment(space, u1, u2, p1, p2, q1, q2, n_samples=100, degree=3,
                                seed=0, strict=True, sup_budget=16, extra=()):
    """Check both directions of the sup-norm / Hilbert-norm equivalence.

    Sup by norm: ``|||phi|||_{p} <= C ||phi||_{q}`` with
    ``C = prod_i sqrt(e a_i / log a_i)``, ``a_i = rho^{-2(q_i - p_i)}``.
    This needs (log, exp)-convex increasing ``u_i``.

    Norm by sup: ``||phi||_{p}^2 <= L^2 prod_i (1 - 8 e^2 hs(q_i, p_i))^{-1} |||phi|||_{q}^2``
    with ``L`` the Gaussian constant; requires ``8 e^2 hs(q_i, p_i) < 1``.
    With ``strict`` a failed precondition raises ``PreconditionError``,
    otherwise the report records it and skips the norm-by-sup direction.
    """
    if not (q1 > p1 and q2 > p2):
        raise PreconditionError("need q_i > p_i")
    hs = (space.hs_norm(q1, p1), space.hs_norm(q2, p2))
    k_nbs = [8.0 * math.e ** 2 * h for h in hs]
    nbs_ok = all(k < 1.0 for k in k_nbs)
    if strict and not nbs_ok:
        raise PreconditionError(
            f"8 e^2 ||i_(q,p)||_HS^2 = {k_nbs} not < 1 for (p, q) = {(p1, p2)}, {(q1, q2)}")
    rng = np.random.default_rng(seed)
    family = list(extra) + [random_chaos(space, degree, rng) for _ in range(n_samples)]
    C = _sup_by_norm_constant(space, p1, q1) * _sup_by_norm_constant(space, p2, q2)
    report = {
        "n": len(family), "degree": degree, "p": [p1, p2], "q": [q1, q2],
        "hs": list(hs), "norm_by_sup_precondition": [k < 1.0 for k in k_nbs], "norm_by_sup_factor": k_nbs,
        "sup_by_norm": {"C": C, "ratios": []},
        "norm_by_sup": None,
    }
    L = constant = None
    if nbs_ok:
        L = gaussian_constant_L(u1, u2, q1, q2, space)
        constant = L ** 2 / ((1.0 - k_nbs[0]) * (1.0 - k_nbs[1]))
        report["norm_by_sup"] = {"L": L, "constant": constant, "ratios": []}
    for i, phi in enumerate(family):
        sup_p = sup_norm(phi, u1, u2, p1, p2, budget=sup_budget, seed=seed + i).value
        n_q = norm_test(phi, u1, u2, q1, q2)
        report["sup_by_norm"]["ratios"].append(sup_p / (C * n_q) if n_q > 0 else 0.0)
        if nbs_ok:
            sup_q = sup_norm(phi, u1, u2, q1, q2, budget=sup_budget, seed=seed + i).value
            n_p = norm_test(phi, u1, u2, p1, p2)
            report["norm_by_sup"]["ratios"].append(n_p ** 2 / (constant * sup_q ** 2) if sup_q > 0 else math.inf)
    sbn = report["sup_by_norm"]
    sbn["max_ratio"] = max(sbn["ratios"])
    sbn["worst"] = int(np.argmax(sbn["ratios"]))
    sbn["all_pass"] = sbn["max_ratio"] <= 1.0
    if nbs_ok:
        nbs = report["norm_by_sup"]
        nbs["max_ratio"] = max(nbs["ratios"])
        nbs["worst"] = int(np.argmax(nbs["ratios"]))
        nbs["all_pass"] = nbs["max_ratio"] <= 1.0
    return report


# ------------------------------------------------------ monomial algebra

def to_monomials(phi):
    """``{exponents over (x_1..x_d, y_1..y_d): coefficient}``."""
    d = phi.space.d
    out = {}
    for k in phi.kernels.values():
        for (a, b), c in k.entries.items():
            e = [0] * (2 * d)
            for i in a:
                e[i] += 1
            for j in b:
                e[d + j] += 1
            key = tuple(e)
            out[key] = out.get(key, 0j) + k.mult((a, b)) * c
    return out


def from_monomials(space, mono):
    d = space.d
    kernels = {}
    for e, coef in mono.items():
        a = tuple(i for i in range(d) for _ in range(e[i]))
        b = tuple(j for j in range(d) for _ in range(e[d + j]))
        l, m = len(a), len(b)
        if (l, m) not in kernels:
            kernels[(l, m)] = {}
        kernels[(l, m)][(a, b)] = coef / (multiplicity(a) * multiplicity(b))
    return ChaosVector(space, {lm: KernelTensor(lm[0], lm[1], d, e) for lm, e in kernels.items()})


def multiply(phi, psi):
    """Pointwise product of two chaos polynomials."""
    _check_space(phi, psi)
    a, b = to_monomials(phi), to_monomials(psi)
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(i + j for i, j in zip(ea, eb))
            out[e] = out.get(e, 0j) + ca * cb
    return from_monomials(phi.space, out)


# ---------------------------------------------------------------- JSON

def to_json(phi):
    kernels = []
    for (l, m) in sorted(phi.kernels):
        k = phi.kernels[(l, m)]
        kernels.append({
            "l": l, "m": m,
            "entries": [{"idx_l": list(a), "idx_m": list(b), "re": c.real, "im": c.imag}
                        for (a, b), c in sorted(k.entries.items())],
        })
    return {"d": phi.space.d, "lambda": list(phi.space.lam), "kernels": kernels}


def from_json(obj):
    space = SpaceModel(tuple(obj["lambda"]))
    if space.d != obj["d"]:
        raise ValueError("d does not match the eigenvalue list")
    kernels = {}
    for k in obj["kernels"]:
        entries = {(tuple(e["idx_l"]), tuple(e["idx_m"])): complex(e["re"], e["im"])
                   for e in k["entries"]}
        kernels[(k["l"], k["m"])] = KernelTensor(k["l"], k["m"], space.d, entries)
    return ChaosVector(space, kernels)
