"""Vectorized one-dimensional bracketed minimization.

Every routine here minimizes ``n`` independent scalar problems at once.  The
objective receives an array ``x`` of shape ``(n, k)`` (row ``i`` holds trial
points for problem ``i``) and must return values of the same shape.  NaN
values are treated as ``+inf``.
"""

import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

OK = 0
LEFT_EDGE = -1
RIGHT_EDGE = 1


def _call(fun, x):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = np.asarray(fun(x), dtype=float)
    return np.where(np.isnan(v), np.inf, v)


def golden_section(fun, a, b, tol=1e-12):
    """Golden-section search on ``[a_i, b_i]`` for each row.

    Returns ``(xmin, fmin)``.  The minimum value is the best of all evaluated
    points, including one parabolic-vertex evaluation at the end.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    width = float(np.max(b - a)) if a.size else 0.0
    n_iter = 0 if width <= tol else int(math.ceil(math.log(tol / width) / math.log(INV_PHI)))
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = _call(fun, c[:, None])[:, 0]
    fd = _call(fun, d[:, None])[:, 0]
    for _ in range(n_iter):
        left = fc <= fd
        # keep [a, d] where f(c) <= f(d), else [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_x = np.where(left, b - INV_PHI * (b - a), a + INV_PHI * (b - a))
        fnew = _call(fun, new_x[:, None])[:, 0]
        c_next = np.where(left, new_x, d)
        fc_next = np.where(left, fnew, fd)
        d_next = np.where(left, c, new_x)
        fd_next = np.where(left, fc, fnew)
        c, fc, d, fd = c_next, fc_next, d_next, fd_next

    xs = np.stack([a, c, d, b], axis=1)
    fs = _call(fun, xs)
    best = np.argmin(fs, axis=1)
    rows = np.arange(len(a))
    xbest = xs[rows, best]
    fbest = fs[rows, best]

    # one parabolic refinement through (c, d, midpoint)
    m = 0.5 * (a + b)
    fm = _call(fun, m[:, None])[:, 0]
    xv = _parabola_vertex(c, fc, m, fm, d, fd)
    ok = np.isfinite(xv) & (xv >= a) & (xv <= b)
    xv = np.where(ok, xv, m)
    fv = _call(fun, xv[:, None])[:, 0]
    cand_x = np.stack([xbest, m, xv], axis=1)
    cand_f = np.stack([fbest, fm, fv], axis=1)
    pick = np.argmin(cand_f, axis=1)
    return cand_x[rows, pick], cand_f[rows, pick]


def _parabola_vertex(x1, f1, x2, f2, x3, f3):
    with np.errstate(all="ignore"):
        num = (x2 - x1) ** 2 * (f2 - f3) - (x2 - x3) ** 2 * (f2 - f1)
        den = (x2 - x1) * (f2 - f3) - (x2 - x3) * (f2 - f1)
        return x2 - 0.5 * num / den


def scan_then_refine(fun, lo, hi, n_scan=512, n_best=3, tol=1e-12):
    """Coarse scan on a uniform grid, then golden search around the best points."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = lo.shape[0]
    u = np.linspace(0.0, 1.0, n_scan)
    xs = lo[:, None] + (hi - lo)[:, None] * u[None, :]
    fs = _call(fun, xs)
    order = np.argsort(fs, axis=1, kind="stable")[:, :n_best]
    rows = np.arange(n)
    best_x = np.full(n, np.nan)
    best_f = np.full(n, np.inf)
    for j in range(order.shape[1]):
        idx = order[:, j]
        left = xs[rows, np.clip(idx - 1, 0, n_scan - 1)]
        right = xs[rows, np.clip(idx + 1, 0, n_scan - 1)]
        x, f = golden_section(fun, left, right, tol=tol)
        better = f < best_f
        best_x = np.where(better, x, best_x)
        best_f = np.where(better, f, best_f)
    return best_x, best_f


def bracketed_minimize(fun, n, lo=-40.0, hi=40.0, unimodal=True, tol=1e-12,
                       max_expand=5, edge_frac=0.05):
    """Minimize ``n`` problems on an adaptively expanded bracket.

    The bracket starts at ``[lo, hi]`` and is doubled (about its centre)
    while the minimizer sits within ``edge_frac`` of an endpoint, at most
    ``max_expand`` times.

    Returns
    -------
    xmin, fmin : ndarray
    status : ndarray of int
        ``OK``, or ``LEFT_EDGE`` / ``RIGHT_EDGE`` when the minimizer is still
        at an endpoint after all expansions.
    """
    lo_arr = np.full(n, float(lo))
    hi_arr = np.full(n, float(hi))
    xmin = np.full(n, np.nan)
    fmin = np.full(n, np.inf)
    status = np.zeros(n, dtype=int)
    active = np.arange(n)
    for attempt in range(max_expand + 1):
        if active.size == 0:
            break

        def sub(x, _rows=active):
            return fun(x, _rows)

        a, b = lo_arr[active], hi_arr[active]
        if unimodal:
            x, f = golden_section(sub, a, b, tol=tol)
        else:
            x, f = scan_then_refine(sub, a, b, tol=tol)
        xmin[active] = x
        fmin[active] = f
        pos = (x - a) / (b - a)
        at_left = pos < edge_frac
        at_right = pos > 1.0 - edge_frac
        at_edge = at_left | at_right
        status[active] = np.where(at_left, LEFT_EDGE, np.where(at_right, RIGHT_EDGE, OK))
        if attempt == max_expand:
            break
        centre = 0.5 * (a + b)
        half = (b - a)
        lo_arr[active] = np.where(at_edge, centre - half, a)
        hi_arr[active] = np.where(at_edge, centre + half, b)
        active = active[at_edge]
    return xmin, fmin, status
