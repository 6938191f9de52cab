"""Growth functions held in the log domain.

A growth function is a positive continuous function ``u`` on ``[0, inf)``.
Here it is always handled through ``log u`` so that products and quotients
become sums and differences; ``e^r`` alone exceeds float range past
``r = 709``.

The catalog covers ``exp``, the Kondratiev-Streit family, the Bell-type
pair ``exp(e^r - 1)`` / ``exp(2 sqrt(r log sqrt r))`` and the Ouerdiane
family ``u(r^2) = exp(r^k / k)``.
"""

from dataclasses import dataclass, field
import math
import re

import numpy as np

__all__ = [
    "GrowthFunction",
    "ConditionReport",
    "ParseError",
    "catalog_lookup",
    "parse_growth_spec",
    "default_grid",
    "check_U_condition",
    "check_convexity_class",
    "check_equivalence",
    "theta_from_u",
    "u_from_theta",
    "PROPERTIES",
]

PROPERTIES = frozenset({"U0", "U1", "U2", "U3", "log-exp-convex", "log-x2-convex"})

HOLDS = "holds-on-grid"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"


class ParseError(ValueError):
    """Malformed growth-function or measure spec string."""

    def __init__(self, message, text="", column=0):
        self.text = text
        self.column = column
        super().__init__(f"{message} (column {column + 1}: {text!r})" if text else message)


@dataclass(frozen=True, eq=False)
class GrowthFunction:
    """A positive growth function, evaluated as ``log u``.

    ``log_u``, ``closed_form_legendre`` and ``closed_form_dual`` are
    vectorized callables on numpy arrays.
    """

    name: str
    params: dict
    log_u: object
    claimed_properties: frozenset = frozenset()
    closed_form_legendre: object = None
    closed_form_dual: object = None
    meta: dict = field(default_factory=dict)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(over="ignore"):
            return self.log_u(r)

    def claims(self, *props):
        return all(p in self.claimed_properties for p in props)

    @property
    def label(self):
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v!r}" for k, v in sorted(self.params.items()))
        return f"{self.name}:{args}"

    def scaled(self, c):
        """The function ``r -> u(c r)``."""
        c = float(c)
        if c <= 0:
            raise ValueError("scale must be positive")
        return GrowthFunction(
            name=f"{self.name}@{c!r}",
            params=dict(self.params),
            log_u=lambda r, _f=self.log_u: _f(c * np.asarray(r, dtype=float)),
            claimed_properties=self.claimed_properties,
        )


@dataclass
class ConditionReport:
    """Outcome of a finite-grid check.

    ``witness`` holds the grid point(s) where an inequality failed; a
    ``fails`` verdict always carries one.  ``holds_from`` is the smallest
    grid point from which the check passes (``None`` if it never does).
    """

    condition: str
    verdict: str
    witness: list = field(default_factory=list)
    grid: dict = field(default_factory=dict)
    margin: float = float("nan")
    holds_from: float = None
    details: dict = field(default_factory=dict)

    @property
    def holds(self):
        return self.verdict == HOLDS

    def to_dict(self):
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "witness": [float(w) for w in self.witness],
            "grid": self.grid,
            "margin": _jsonable(self.margin),
            "holds_from": _jsonable(self.holds_from),
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }


def _jsonable(v):
    if v is None:
        return None
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


def default_grid(r_min=1e-6, r_max=1e6, n_points=400):
    """Geometric grid covering both limits ``r -> 0`` and ``r -> inf``."""
    return np.geomspace(r_min, r_max, n_points)


def _grid_desc(grid, spacing="given"):
    grid = np.asarray(grid, dtype=float)
    return {"r_min": float(grid[0]), "r_max": float(grid[-1]),
            "n_points": int(grid.size), "spacing": spacing}


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-D array")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] < 0:
        raise ValueError("grid must lie in [0, inf)")
    return grid


# ---------------------------------------------------------------- catalog

def _exp():
    return GrowthFunction(
        name="exp",
        params={},
        log_u=lambda r: np.asarray(r, dtype=float) * 1.0,
        claimed_properties=PROPERTIES,
        closed_form_legendre=_exp_legendre,
        closed_form_dual=lambda r: np.asarray(r, dtype=float) * 1.0,
    )


def _exp_legendre(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = t - t * np.log(t)
    return np.where(t == 0, 0.0, v)


def _kondratiev(beta):
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"kondratiev needs 0 <= beta < 1, got {beta}")
    a = 1.0 + beta

    def log_u(r):
        return a * np.asarray(r, dtype=float) ** (1.0 / a)

    def legendre(t):
        return a * _exp_legendre(t)

    def dual(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(over="ignore"):
            return (1.0 - beta) * r ** (1.0 / (1.0 - beta))

    return GrowthFunction(
        name="kondratiev",
        params={"beta": beta},
        log_u=log_u,
        claimed_properties=PROPERTIES,
        closed_form_legendre=legendre,
        closed_form_dual=dual,
    )


def _bell():
    def log_u(r):
        with np.errstate(over="ignore"):
            return np.expm1(np.asarray(r, dtype=float))

    return GrowthFunction(
        name="bell",
        params={},
        log_u=log_u,
        claimed_properties=frozenset({"U0", "U1", "U3", "log-exp-convex", "log-x2-convex"}),
    )


def _bell_w():
    # w is only real for r >= 1; extended by w = 1 on [0, 1)
    def log_u(r):
        r = np.asarray(r, dtype=float)
        rr = np.maximum(r, 1.0)
        with np.errstate(invalid="ignore"):
            v = 2.0 * np.sqrt(rr * 0.5 * np.log(rr))
        return np.where(r < 1.0, 0.0, v)

    return GrowthFunction(
        name="bell_w",
        params={},
        log_u=log_u,
        claimed_properties=frozenset({"U0", "U1", "U2"}),
        meta={"extension": "w = 1 on [0, 1)"},
    )


def _ouerdiane(k):
    if not 1.0 <= k <= 2.0:
        raise ValueError(f"ouerdiane needs 1 <= k <= 2, got {k}")

    def log_u(r):
        return np.asarray(r, dtype=float) ** (0.5 * k) / k

    def legendre(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = (2.0 * t / k) * (1.0 - np.log(2.0 * t))
        return np.where(t == 0, 0.0, v)

    props = {"U0", "U1", "U2", "U3", "log-exp-convex", "log-x2-convex"}
    dual = None
    if k > 1.0:
        kc = k / (k - 1.0)

        def dual(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(over="ignore"):
                return (2.0 * np.sqrt(r)) ** kc / kc
    return GrowthFunction(
        name="ouerdiane",
        params={"k": k},
        log_u=log_u,
        claimed_properties=frozenset(props),
        closed_form_legendre=legendre,
        closed_form_dual=dual,
        meta={"in_C_half": k > 1.0},
    )


_CATALOG = {
    "exp": (_exp, ()),
    "kondratiev": (_kondratiev, ("beta",)),
    "bell": (_bell, ()),
    "bell_w": (_bell_w, ()),
    "ouerdiane": (_ouerdiane, ("k",)),
}


def catalog_lookup(name, params=None):
    """Return a catalog growth function.

    >>> float(catalog_lookup("kondratiev", {"beta": 0.5})(8.0))
    6.0
    """
    params = dict(params or {})
    if name not in _CATALOG:
        raise KeyError(f"unknown growth function {name!r}; known: {sorted(_CATALOG)}")
    factory, allowed = _CATALOG[name]
    extra = set(params) - set(allowed)
    if extra:
        raise ValueError(f"{name} takes no parameter(s) {sorted(extra)}")
    missing = [p for p in allowed if p not in params]
    if missing:
        raise ValueError(f"{name} requires parameter(s) {missing}")
    return factory(*(float(params[p]) for p in allowed))


_PARAM_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)=([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)$")


def parse_growth_spec(text):
    """Parse ``exp``, ``kondratiev:beta=0.5``, ``ouerdiane:k=1.5`` etc."""
    name, sep, rest = text.partition(":")
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        raise ParseError("bad function name", text, 0)
    params = {}
    if sep:
        col = len(name) + 1
        for part in rest.split(","):
            m = _PARAM_RE.match(part)
            if not m:
                raise ParseError("expected name=decimal", text, col)
            params[m.group(1)] = float(m.group(2))
            col += len(part) + 1
    try:
        return catalog_lookup(name, params)
    except (KeyError, ValueError) as exc:
        raise ParseError(str(exc).strip('"'), text, 0) from exc


# --------------------------------------------------------------- theta maps

def theta_from_u(u):
    """``theta(s) = log u(s^2) / 2``."""

    def theta(s):
        s = np.asarray(s, dtype=float)
        return 0.5 * u.log_u(s * s)

    return theta


def u_from_theta(theta, name="from_theta"):
    """Growth function ``u(r) = exp(2 theta(sqrt r))``."""
    return GrowthFunction(
        name=name,
        params={},
        log_u=lambda r: 2.0 * np.asarray(theta(np.sqrt(np.asarray(r, dtype=float))), dtype=float),
    )


# ---------------------------------------------------------------- checks

CONVEXITY_ATOL = 1e-9


def _convexity_violations(x, f, atol=CONVEXITY_ATOL):
    """Amount by which each interior point lies above its neighbours' chord."""
    x0, x1, x2 = x[:-2], x[1:-1], x[2:]
    f0, f1, f2 = f[:-2], f[1:-1], f[2:]
    w = (x2 - x1) / (x2 - x0)
    with np.errstate(invalid="ignore"):
        excess = f1 - (w * f0 + (1.0 - w) * f2)
    scale = np.maximum(1.0, np.maximum(np.abs(f0), np.maximum(np.abs(f1), np.abs(f2))))
    return excess, atol * scale


def _convexity_report(cond, r, x, f, grid):
    finite = np.isfinite(f)
    r, x, f = r[finite], x[finite], f[finite]
    if f.size < 3:
        return ConditionReport(cond, INCONCLUSIVE, grid=grid, details={"reason": "too few finite samples"})
    excess, tol = _convexity_violations(x, f)
    bad = excess > tol
    margin = float(np.max(excess - tol))
    if not np.any(bad):
        return ConditionReport(cond, HOLDS, grid=grid, margin=-margin, holds_from=float(r[0]))
    last_bad = np.nonzero(bad)[0][-1] + 1  # index into r of the offending middle point
    holds_from = float(r[last_bad + 1]) if last_bad + 1 < r.size else None
    worst = int(np.argmax(excess - tol)) + 1
    return ConditionReport(
        cond, FAILS, witness=[float(r[worst])], grid=grid, margin=-margin,
        holds_from=holds_from,
        details={"n_violations": int(bad.sum())},
    )


def check_U_condition(u, which, grid=None, tol=1e-5):
    """Check one of U0..U3 on a finite grid.

    U2 is a limit condition and can only come back ``holds-on-grid`` or
    ``inconclusive``.
    """
    grid = _check_grid(default_grid() if grid is None else grid)
    desc = _grid_desc(grid)
    lu = u(grid)
    if which == "U0":
        vals = np.concatenate([[float(u(0.0))], lu])
        pts = np.concatenate([[0.0], grid])
        i = int(np.nanargmin(vals))
        m = float(vals[i])
        if m < -tol:
            return ConditionReport("U0", FAILS, witness=[float(pts[i])], grid=desc, margin=m)
        if m > tol:
            return ConditionReport("U0", INCONCLUSIVE, witness=[float(pts[i])], grid=desc, margin=m,
                                   details={"reason": "grid minimum above 0"})
        return ConditionReport("U0", HOLDS, witness=[float(pts[i])], grid=desc, margin=abs(m))
    if which == "U1":
        pts = np.concatenate([[0.0], grid]) if grid[0] > 0 else grid
        vals = u(pts)
        u0 = float(vals[0])
        with np.errstate(invalid="ignore"):
            # inf - inf where log u overflows on the tail: not a drop
            drops = np.nan_to_num(-np.diff(vals), nan=0.0)
        allowed = tol * np.maximum(1.0, np.abs(vals[1:]))
        if abs(u0) > tol:
            return ConditionReport("U1", FAILS, witness=[0.0], grid=desc, margin=-abs(u0))
        if np.any(drops > allowed):
            i = int(np.argmax(drops - allowed))
            return ConditionReport("U1", FAILS, witness=[float(pts[i + 1])], grid=desc,
                                   margin=-float(drops[i]))
        return ConditionReport("U1", HOLDS, grid=desc, margin=float(-np.max(drops, initial=0.0)))
    if which == "U2":
        return _check_U2(u, grid, desc, lu, tol)
    if which == "U3":
        t = np.sqrt(grid)
        rep = _convexity_report("U3", grid, t, lu, desc)
        return rep
    raise ValueError(f"unknown condition {which!r}")


def _check_U2(u, grid, desc, lu, tol):
    ratio = lu / grid
    n_tail = max(3, grid.size // 10)
    tail = ratio[-n_tail:]
    est = float(tail[-1])
    if not np.all(np.isfinite(tail)):
        return ConditionReport("U2", INCONCLUSIVE, witness=[float(grid[-1])], grid=desc,
                               details={"reason": "non-finite log u on tail", "limit_estimate": float("inf")})
    # holds-on-grid if the ratio stops increasing on the tail
    rising = np.diff(tail) > tol * np.maximum(1.0, np.abs(tail[1:]))
    growth = tail[-1] / tail[0] if tail[0] > 0 else float("inf")
    if np.all(rising) and growth > 1.0 + 10 * tol:
        return ConditionReport("U2", INCONCLUSIVE, witness=[float(grid[-1])], grid=desc,
                               margin=est, details={"reason": "log u(r)/r still increasing at r_max",
                                                    "limit_estimate": est})
    return ConditionReport("U2", HOLDS, grid=desc, margin=est,
                           details={"limit_estimate": est, "largest_r": float(grid[-1]),
                                    "tail_max": float(np.max(tail))})


def check_convexity_class(u, cls, k=2.0, grid=None):
    """Discrete convexity of ``x -> log u(e^x)`` or ``x -> log u(x^k)``.

    The ``r``-grid is mapped to ``x = log r`` resp. ``x = r^(1/k)``; the
    report's ``holds_from`` is the first grid ``r`` past the last violation.
    """
    grid = _check_grid(default_grid() if grid is None else grid)
    desc = _grid_desc(grid)
    lu = u(grid)
    if cls == "log-exp":
        if grid[0] <= 0:
            grid, lu = grid[1:], lu[1:]
        return _convexity_report("log-exp", grid, np.log(grid), lu, desc)
    if cls == "log-xk":
        if k <= 0:
            raise ValueError("k must be positive")
        return _convexity_report(f"log-x^{k:g}", grid, grid ** (1.0 / k), lu, desc)
    raise ValueError(f"unknown convexity class {cls!r}")


_SCALES = (1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0, 16.0)


def _one_sided(lu_r, lv_scaled_fn, grid, tol):
    """Smallest scale b with log v(b r) - log u(r) bounded below on the tail."""
    for b in _SCALES:
        diff = lv_scaled_fn(b) - lu_r
        if not np.all(np.isfinite(diff)):
            continue
        tail = diff[-max(3, diff.size // 10):]
        still_falling = tail[-1] < np.min(diff[:-1]) - tol and tail[-1] < tail[-2] - tol
        if not still_falling:
            return b, float(np.min(diff)), None
    diff = lv_scaled_fn(_SCALES[-1]) - lu_r
    return None, float(np.min(diff)), float(grid[-1])


def check_equivalence(u, v, grid=None, r0=None, tol=1e-9):
    """Search for ``a1 u(r) <= v(b1 r)`` and ``v(r) <= a2 u(b2 r)``, ``r >= r0``.

    Constants are reported as ``a1, a2, b1, b2``.  On a finite grid a lower
    bound always exists, so a scale ``b`` is accepted only if the log gap is
    not still decreasing at the end of the grid.
    """
    grid = _check_grid(default_grid() if grid is None else grid)
    if r0 is not None:
        grid = grid[grid >= r0]
    desc = _grid_desc(grid)
    lu, lv = u(grid), v(grid)
    b1, log_a1, w1 = _one_sided(lu, lambda b: v(b * grid), grid, tol)
    b2, log_neg_a2, w2 = _one_sided(lv, lambda b: u(b * grid), grid, tol)
    details = {"r0": float(grid[0])}
    if b1 is None or b2 is None:
        return ConditionReport("equivalence", FAILS, witness=[w for w in (w1, w2) if w is not None],
                               grid=desc, details=details)
    details.update(a1=math.exp(log_a1), b1=b1, a2=math.exp(-log_neg_a2), b2=b2,
                   log_a1=log_a1, log_a2=-log_neg_a2)
    return ConditionReport("equivalence", HOLDS, grid=desc, margin=min(log_a1, log_neg_a2),
                           details=details)
