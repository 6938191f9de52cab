"""Legendre transform, dual Legendre transform, L-function and weights.

Conventions (all values are natural logs):

* ``legendre(u, t)``  = ``log l_u(t)``, ``l_u(t) = inf_{r>0} u(r) / r^t``
* ``dual_legendre(u, r)`` = ``log u*(r)``, ``u*(r) = sup_{s>=0} e^{2 sqrt(rs)} / u(s)``
* ``l_function(u, r)`` = ``log L_u(r)``, ``L_u(r) = sum_n l_u(n) r^n``

The infimum is searched over ``x = log r`` and the supremum over
``y = log sqrt(s)``, both on the bracket ``[-40, 40]`` doubled up to five
times while the optimum hugs an endpoint.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import gammaln

from . import _minimize
from .growth import ConditionReport, GrowthFunction, default_grid, FAILS, HOLDS, INCONCLUSIVE

__all__ = [
    "DivergentTransformError",
    "TruncationError",
    "TransformTable",
    "WeightSequence",
    "legendre",
    "legendre_table",
    "dual_legendre",
    "dual_growth",
    "legendre_of_dual",
    "l_function",
    "l_function_complex",
    "weight_sequence",
    "verify_l_bound",
    "verify_l_scaling",
    "verify_l_sqrt_bound",
    "verify_dual_legendre_identity",
]

L_FUNCTION_TOL = 1e-16
L_FUNCTION_MAX_DEGREE = 10_000_000


class DivergentTransformError(ArithmeticError):
    """The infimum/supremum runs off the search bracket."""

    def __init__(self, message, points=()):
        self.points = list(points)
        super().__init__(message)


class TruncationError(ArithmeticError):
    """No tail certificate for the L-function series within the degree cap."""

    def __init__(self, message, partial_log=float("nan"), degree=0):
        self.partial_log = partial_log
        self.degree = degree
        super().__init__(message)


@dataclass
class TransformTable:
    source: str
    t: np.ndarray
    log_values: np.ndarray
    argmins: np.ndarray
    diagnostics: dict = field(default_factory=dict)


@dataclass
class WeightSequence:
    N: int
    log_alpha: np.ndarray
    log_ell: np.ndarray

    @property
    def alpha(self):
        return np.exp(self.log_alpha)


# ------------------------------------------------------------------ legendre

def _legendre_numeric(u, t):
    """Returns (log l_u(t), argmin r) for a 1-D array t."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    arg = np.empty_like(t)
    if t.size == 0:
        return out, arg

    def obj(x, rows):
        return u(np.exp(x)) - t[rows, None] * x

    unimodal = u.claims("log-exp-convex")
    x, f, status = _minimize.bracketed_minimize(obj, t.size, unimodal=unimodal)
    bad = (status == _minimize.RIGHT_EDGE) & (t > 0)
    if np.any(bad):
        raise DivergentTransformError(
            f"Legendre transform of {u.label} unbounded below on the bracket", t[bad])
    # infimum approached as r -> 0+: continuity gives log u(0) - 0 at t = 0
    zero = t == 0
    if np.any(zero):
        f = np.where(zero, np.minimum(f, float(u(0.0))), f)
    out[:] = f
    arg[:] = np.exp(x)
    return out, arg


def legendre(u, t, method="auto"):
    """``log l_u(t)``; vectorized in ``t``.

    ``method`` is ``"auto"`` (closed form when the function carries one),
    ``"numeric"`` or ``"closed"``.

    >>> from cksgrowth.growth import catalog_lookup
    >>> round(float(legendre(catalog_lookup("exp"), 1.0, method="numeric")), 12)
    1.0
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    if method == "closed" or (method == "auto" and u.closed_form_legendre is not None):
        if u.closed_form_legendre is None:
            raise ValueError(f"{u.label} has no closed-form Legendre transform")
        return u.closed_form_legendre(t_arr)
    if method not in ("auto", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    flat = t_arr.reshape(-1)
    vals, _ = _legendre_numeric(u, flat)
    return vals.reshape(t_arr.shape)


def legendre_table(u, t, method="numeric"):
    """Sampled Legendre values with minimizers and diagnostics."""
    t = np.asarray(t, dtype=float)
    if method == "numeric":
        vals, arg = _legendre_numeric(u, t)
    else:
        vals, arg = legendre(u, t, method=method), np.full(t.shape, np.nan)
    slope = np.diff(vals) / np.diff(t) if t.size > 1 else np.array([])
    return TransformTable(source=u.label, t=t, log_values=vals, argmins=arg,
                          diagnostics={"method": method, "finite": bool(np.all(np.isfinite(vals))),
                                       "max_slope": float(np.max(slope)) if slope.size else float("nan"),
                                       "min_slope": float(np.min(slope)) if slope.size else float("nan")})


# ------------------------------------------------------------- dual legendre

def _dual_numeric(u, r):
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    arg = np.empty_like(r)
    if r.size == 0:
        return out, arg
    sq = np.sqrt(r)

    def obj(y, rows):
        sigma = np.exp(y)
        return -(2.0 * sq[rows, None] * sigma - u(sigma * sigma))

    unimodal = u.claims("log-x2-convex") or u.claims("U3")
    # two doublings reach |y| = 160; beyond ~350 exp(2y) overflows and hides divergence
    y, f, status = _minimize.bracketed_minimize(obj, r.size, unimodal=unimodal, max_expand=2)
    bad = (status == _minimize.RIGHT_EDGE) & (r > 0)
    if np.any(bad):
        raise DivergentTransformError(
            f"dual Legendre transform of {u.label} diverges (u grows too slowly)", r[bad])
    at_zero = -float(u(0.0))
    val = -f
    s = np.exp(2.0 * y)
    use_zero = at_zero >= val
    out[:] = np.where(use_zero, at_zero, val)
    arg[:] = np.where(use_zero, 0.0, s)
    return out, arg


def dual_legendre(u, r, method="auto"):
    """``log u*(r)``; vectorized in ``r``.

    >>> from cksgrowth.growth import catalog_lookup
    >>> round(float(dual_legendre(catalog_lookup("kondratiev", {"beta": 0.5}), 1.0, "numeric")), 10)
    0.5
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("r must be nonnegative")
    if method == "closed" or (method == "auto" and u.closed_form_dual is not None):
        if u.closed_form_dual is None:
            raise ValueError(f"{u.label} has no closed-form dual")
        return u.closed_form_dual(r_arr)
    if method not in ("auto", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    vals, _ = _dual_numeric(u, r_arr.reshape(-1))
    return vals.reshape(r_arr.shape)


def legendre_of_dual(u, t):
    """``log l_{u*}(t) = 2t - log l_u(t) - 2t log t`` (with ``0^0 = 1``).

    Valid for (log, x^2)-convex ``u``.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        tlogt = np.where(t == 0, 0.0, t * np.log(t))
    return 2.0 * t - legendre(u, t) - 2.0 * tlogt


def dual_growth(u, numeric=False):
    """The dual Legendre transform ``u*`` as a growth function.

    ``log u*(s^2)`` is a supremum of functions linear in ``s`` and
    ``log u*(e^x)`` a supremum of convex functions of ``x``, so both
    convexity classes hold for any ``u``.  Its Legendre transform uses
    ``legendre_of_dual`` when ``u`` is (log, x^2)-convex.
    """
    if u.closed_form_dual is not None and not numeric:
        log_u = u.closed_form_dual
    else:
        def log_u(r, _u=u):
            return dual_legendre(_u, r, method="numeric")
    props = {"log-exp-convex", "log-x2-convex", "U3"}
    if u.claims("U0"):
        props |= {"U0", "U1"}
    closed_leg = None
    closed_dual = None
    if u.claims("log-x2-convex") or u.claims("U3"):
        closed_leg = lambda t, _u=u: legendre_of_dual(_u, t)  # noqa: E731
        closed_dual = u.log_u
    return GrowthFunction(
        name=f"dual({u.label})",
        params=dict(u.params),
        log_u=log_u,
        claimed_properties=frozenset(props),
        closed_form_legendre=closed_leg,
        closed_form_dual=closed_dual,
        meta={"base": u.label, "numeric": numeric or u.closed_form_dual is None},
    )


# ---------------------------------------------------------------- L-function

class _EllCache:
    """Memoized ``log l_u(n)`` at integer ``n``."""

    def __init__(self, u):
        self.u = u
        self.store = {}

    def __call__(self, n):
        missing = [int(k) for k in n if int(k) not in self.store]
        if missing:
            vals = legendre(self.u, np.asarray(missing, dtype=float))
            self.store.update(zip(missing, np.asarray(vals, dtype=float).tolist()))
        return np.array([self.store[int(k)] for k in n])


def _log_terms(ell, n, log_r):
    return ell(n) + n * log_r


def _find_peak(ell, log_r, max_degree):
    """Integer argmax of the log-concave sequence a_n = log l(n) + n log r."""
    cand = np.unique(np.concatenate([[0, 1, 2], np.round(np.geomspace(1, max_degree, 60))])).astype(np.int64)
    a = _log_terms(ell, cand, log_r)
    j = int(np.argmax(a))
    lo = int(cand[max(j - 1, 0)])
    hi = int(cand[min(j + 1, cand.size - 1)])
    while hi - lo > 256:
        pts = np.unique(np.linspace(lo, hi, 65).round().astype(np.int64))
        a = _log_terms(ell, pts, log_r)
        j = int(np.argmax(a))
        lo = int(pts[max(j - 1, 0)])
        hi = int(pts[min(j + 1, pts.size - 1)])
    pts = np.arange(lo, hi + 1, dtype=np.int64)
    a = _log_terms(ell, pts, log_r)
    return int(pts[int(np.argmax(a))])


def _log_sum(ell, log_r, tol, max_degree, phase=None):
    """Sum l(n) r^n e^{i n phase} around the peak; returns (log|S|, arg S, degree)."""
    u = ell.u
    peak = _find_peak(ell, log_r, max_degree)
    chunk = 64
    lo, hi = peak, peak
    n = np.array([peak], dtype=np.int64)
    a = _log_terms(ell, n, log_r)
    while True:
        amax = float(np.max(a))
        log_total = amax + math.log(float(np.sum(np.exp(a - amax))))
        # right tail: ratios exp(a_n - a_{n-1}) decrease (log-concavity)
        right_ok = False
        if n.size >= 2:
            d = a[-1] - a[-2]
            if d < 0:
                q = math.exp(d)
                right_ok = a[-1] + math.log(q / (1.0 - q)) <= log_total + math.log(tol)
        left_ok = lo == 0
        if not left_ok and n.size >= 2:
            d = a[0] - a[1]
            if d < 0:
                q = math.exp(d)
                left_ok = a[0] + math.log(q / (1.0 - q)) <= log_total + math.log(tol)
        if right_ok and left_ok:
            break
        if hi >= max_degree:
            raise TruncationError(f"L-function of {u.label} not certified within degree {max_degree}",
                                  partial_log=log_total, degree=hi)
        new = []
        if not right_ok or n.size < 2:
            new_hi = min(hi + chunk, max_degree)
            new.append(np.arange(hi + 1, new_hi + 1, dtype=np.int64))
            hi = new_hi
        if not left_ok:
            new_lo = max(lo - chunk, 0)
            new.insert(0, np.arange(new_lo, lo, dtype=np.int64))
            lo = new_lo
        n = np.arange(lo, hi + 1, dtype=np.int64)
        a = _log_terms(ell, n, log_r)
        chunk *= 2
    # smallest certified truncation degree past the peak
    amax = float(np.max(a))
    log_total = amax + math.log(float(np.sum(np.exp(a - amax))))
    dd = np.diff(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.exp(dd)
        bound = a[1:] + np.log(q / (1.0 - q))
    ok = (dd < 0) & (bound <= log_total + math.log(tol)) & (n[1:] >= peak)
    degree = int(n[1:][np.argmax(ok)]) if np.any(ok) else int(n[-1])
    if phase is None:
        return log_total, 0.0, degree
    z = np.sum(np.exp(a - amax) * np.exp(1j * phase * n))
    if z == 0:
        return -math.inf, 0.0, degree
    return amax + math.log(abs(z)), float(np.angle(z)), degree


def l_function(u, r, tol=L_FUNCTION_TOL, max_degree=L_FUNCTION_MAX_DEGREE, return_degree=False):
    """``log L_u(r)`` by log-domain summation with a ratio-test tail bound.

    The terms ``l_u(n) r^n`` are log-concave in ``n``, so the sum is taken
    outward from the largest term and stopped once both geometric tail
    bounds fall below ``tol`` times the partial sum.
    """
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    vals = np.empty(r_arr.shape)
    degs = np.empty(r_arr.shape, dtype=np.int64)
    ell = _EllCache(u)
    for i, ri in enumerate(r_arr):
        if ri < 0:
            raise ValueError("r must be nonnegative")
        if ri == 0:
            vals[i] = float(legendre(u, 0.0))
            degs[i] = 0
            continue
        vals[i], _, degs[i] = _log_sum(ell, math.log(ri), tol, max_degree)
    if np.ndim(r) == 0:
        vals, degs = float(vals[0]), int(degs[0])
    return (vals, degs) if return_degree else vals


def l_function_complex(u, z, tol=L_FUNCTION_TOL, max_degree=L_FUNCTION_MAX_DEGREE):
    """Principal ``log L_u(z)`` for complex ``z``; vectorized."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z_arr.shape, dtype=complex)
    ell = _EllCache(u)
    for i, zi in enumerate(z_arr.ravel()):
        if zi == 0:
            out.flat[i] = complex(float(legendre(u, 0.0)))
            continue
        mag, ph, _ = _log_sum(ell, math.log(abs(zi)), tol, max_degree, phase=float(np.angle(zi)))
        out.flat[i] = complex(mag, ph)
    return out[0] if np.ndim(z) == 0 else out


def weight_sequence(u, N):
    """``log alpha_u(n) = -log l_u(n) - log n!`` for ``n = 0..N``."""
    if N < 0:
        raise ValueError("N must be >= 0")
    n = np.arange(N + 1, dtype=float)
    log_ell = np.asarray(legendre(u, n), dtype=float)
    return WeightSequence(N=N, log_alpha=-log_ell - gammaln(n + 1.0), log_ell=log_ell)


# ---------------------------------------------------------------- facts

def _ineq_report(cond, grid, lhs, rhs, details=None, atol=1e-12):
    gap = rhs - lhs
    tol = atol * np.maximum(1.0, np.abs(rhs))
    bad = gap < -tol
    desc = {"r_min": float(grid[0]), "r_max": float(grid[-1]), "n_points": int(grid.size), "spacing": "given"}
    margin = float(np.min(gap))
    if np.any(bad):
        return ConditionReport(cond, FAILS, witness=[float(grid[int(np.argmin(gap))])], grid=desc,
                               margin=margin, details=details or {})
    return ConditionReport(cond, HOLDS, grid=desc, margin=margin, details=details or {})


def verify_l_bound(u, a, grid=None):
    """``L_u(r) <= (e a / log a) u(a r)`` and (log, exp)-convexity of ``L_u``."""
    if a <= 1:
        raise ValueError("a must exceed 1")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    lhs = l_function(u, grid)
    rhs = math.log(math.e * a / math.log(a)) + u(a * grid)
    rep = _ineq_report("l-bound", grid, lhs, rhs, {"a": a})
    pos = grid > 0
    from .growth import _convexity_violations
    excess, tol = _convexity_violations(np.log(grid[pos]), lhs[pos])
    convex = bool(np.all(excess <= tol))
    rep.details["L_log_exp_convex"] = convex
    if not convex and rep.verdict == HOLDS:
        rep.verdict = FAILS
        rep.witness = [float(grid[pos][int(np.argmax(excess - tol)) + 1])]
    return rep


def verify_l_scaling(u, k, grid=None):
    """Measure ``C_hat = max u(r) / L_u(2^k r)``; holds iff finite."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    log_ratio = u(grid) - l_function(u, 2.0 ** k * grid)
    i = int(np.argmax(log_ratio))
    log_c = float(log_ratio[i])
    desc = {"r_min": float(grid[0]), "r_max": float(grid[-1]), "n_points": int(grid.size), "spacing": "given"}
    verdict = HOLDS if math.isfinite(log_c) else INCONCLUSIVE
    return ConditionReport("l-scaling", verdict, witness=[float(grid[i])], grid=desc, margin=log_c,
                           details={"k": k, "log_C_hat": log_c, "C_hat": math.exp(log_c)})


def verify_l_sqrt_bound(u, k, a, grid=None):
    """``log L_u(r) <= [log l_u(0) + log(e a / log a) + log u(a 2^{k+1} r)] / 2``."""
    if a <= 1:
        raise ValueError("a must exceed 1")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    lhs = l_function(u, grid)
    rhs = 0.5 * (float(legendre(u, 0.0)) + math.log(math.e * a / math.log(a))) \
        + 0.5 * u(a * 2.0 ** (k + 1) * grid)
    return _ineq_report("l-sqrt-bound", grid, lhs, rhs, {"a": a, "k": k})


def verify_dual_legendre_identity(u, t_grid, rtol=1e-6):
    """Compare numeric ``l_{u*}`` with ``e^{2t} / (l_u(t) t^{2t})``."""
    t_grid = np.asarray(t_grid, dtype=float)
    numeric = legendre(dual_growth(u, numeric=u.closed_form_dual is None), t_grid, method="numeric")
    formula = legendre_of_dual(u, t_grid)
    err = np.abs(numeric - formula) / np.maximum(np.abs(formula), 1e-12)
    err = np.where(np.abs(numeric - formula) <= 1e-12, 0.0, err)
    i = int(np.argmax(err))
    desc = {"r_min": float(t_grid[0]), "r_max": float(t_grid[-1]), "n_points": int(t_grid.size),
            "spacing": "given"}
    details = {"max_rel_discrepancy": float(err[i])}
    if err[i] > rtol:
        return ConditionReport("dual-legendre-identity", FAILS, witness=[float(t_grid[i])], grid=desc,
                               margin=-float(err[i]), details=details)
    return ConditionReport("dual-legendre-identity", HOLDS, grid=desc, margin=rtol - float(err[i]), details=details)
