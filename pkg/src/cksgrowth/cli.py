"""Command-line front end: ``cksgrowth {transform,verify,characterize,measure}``.

Results are line-delimited JSON records ending with a summary record, or a
flat CSV projection.  The resolved run configuration is written next to the
results as ``<out>.config`` (flat ``key = value`` lines) and can be fed back
with ``--config`` to reproduce the run byte for byte.

Exit codes: 0 all checks passed, 2 a mathematical check failed, 3 input
error, 4 numerical non-convergence.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import analytic, chaos, growth, measures, transforms
from .growth import HOLDS, ParseError, parse_growth_spec

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4

FACTS = ("l-bound", "l-scaling", "l-sqrt-bound", "dual-legendre-identity")
CONDITIONS = ("U0", "U1", "U2", "U3", "log-exp-convex", "log-x2-convex")
# keys that locate a run rather than define it
_NOT_CONFIG = {"out", "config"}


class InputError(ValueError):
    pass


# ------------------------------------------------------------ parsing helpers

def parse_grid(text):
    """``a:b:step`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            a, b, step = (float(v) for v in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            count = int(round((b - a) / step)) + 1
            return a + step * np.arange(count)
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"bad grid {text!r}: expected a:b:step or v1,v2,...") from None


def parse_floats(text):
    out = []
    for v in str(text).split(","):
        v = v.strip()
        try:
            out.append(math.e if v == "e" else float(v))
        except ValueError:
            raise InputError(f"bad number {v!r} in {text!r}") from None
    return out


def parse_count(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad count {text!r}") from None
    if v != int(v) or v < 0:
        raise argparse.ArgumentTypeError(f"count must be a nonnegative integer: {text!r}")
    return int(v)


def pair(values, name):
    if len(values) == 1:
        return values[0], values[0]
    if len(values) == 2:
        return values[0], values[1]
    raise InputError(f"--{name} takes one or two values")


def make_space(args):
    lam = parse_floats(args.__dict__["lambda"])
    d = args.d if args.d is not None else len(lam)
    if len(lam) == 1 and d > 1:
        lam = lam * d
    if len(lam) != d:
        raise InputError(f"--lambda has {len(lam)} values but --d is {d}")
    try:
        return chaos.SpaceModel(tuple(lam))
    except ValueError as exc:
        raise InputError(str(exc)) from None


# ------------------------------------------------------------ reporting

def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [_clean(v.real), _clean(v.imag)]
    return growth._jsonable(v)


class Report:
    """Collects records and check outcomes for one run."""

    def __init__(self, command):
        self.command = command
        self.records = []
        self.failed = []
        self.n_checks = 0
        self.numeric_failure = False

    def add(self, kind, **fields):
        self.records.append({"record": kind, **fields})

    def check(self, name, passed, **fields):
        self.n_checks += 1
        if not passed:
            self.failed.append(name)
        self.add("check", check=name, passed=bool(passed), **fields)

    def exit_code(self):
        if self.numeric_failure:
            return EXIT_NUMERIC
        return EXIT_CHECK_FAILED if self.failed else EXIT_OK

    def summary(self):
        return {"record": "summary", "command": self.command, "checks": self.n_checks,
                "failed": self.failed, "exit_code": self.exit_code()}


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v, sort_keys=True)
        else:
            out[key] = v
    return out


def render(records, fmt):
    records = [_clean(r) for r in records]
    if fmt == "json":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    rows = [_flatten(r) for r in records]
    cols = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ------------------------------------------------------------ commands

def cmd_transform(args, rep):
    u = parse_growth_spec(args.fn)
    if not (args.legendre or args.dual or args.lfunction or args.weights):
        raise InputError("choose at least one of --legendre, --dual, --lfunction, --weights")
    if args.legendre:
        t = parse_grid(args.t)
        tab = transforms.legendre_table(u, t)
        closed = u.closed_form_legendre(t) if u.closed_form_legendre else None
        for i, ti in enumerate(t):
            row = {"t": ti, "log_value": tab.log_values[i], "argmin": tab.argmins[i]}
            if closed is not None:
                row["closed_form_log"] = closed[i]
            rep.add("legendre", **row)
        rep.add("table", table="legendre", function=u.label, t_or_r_grid=args.t,
                diagnostics=tab.diagnostics)
        if closed is not None:
            err = _rel_err(tab.log_values, closed)
            rep.check("legendre-closed-form", err <= args.tol, max_rel_error=err)
    if args.dual:
        r = parse_grid(args.r)
        num = transforms.dual_legendre(u, r, method="numeric")
        closed = u.closed_form_dual(r) if u.closed_form_dual else None
        for i, ri in enumerate(r):
            row = {"r": ri, "log_value": num[i]}
            if closed is not None:
                row["closed_form_log"] = closed[i]
            rep.add("dual", **row)
        if closed is not None:
            err = _rel_err(num, closed)
            rep.check("dual-closed-form", err <= args.tol, max_rel_error=err)
    if args.lfunction:
        r = parse_grid(args.r)
        vals, deg = transforms.l_function(u, r, return_degree=True)
        for ri, v, n in zip(r, vals, deg):
            rep.add("lfunction", r=ri, log_value=v, terms=n)
    if args.weights:
        ws = transforms.weight_sequence(u, args.n)
        for n, (la, le) in enumerate(zip(ws.log_alpha, ws.log_ell)):
            rep.add("weights", n=n, log_alpha=la, alpha=math.exp(la), log_ell=le)


def _rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    diff = np.abs(a - b)
    err = np.where(diff <= 1e-12, 0.0, diff / np.maximum(np.abs(b), 1e-12))
    return float(np.max(err)) if err.size else 0.0


def _named_list(text, allowed, what):
    if text == "all":
        return list(allowed)
    items = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in items if s not in allowed]
    if bad:
        raise InputError(f"unknown {what}: {', '.join(bad)} (choose from {', '.join(allowed)})")
    return items


def cmd_verify(args, rep):
    if not (args.facts or args.conditions or args.norm_equivalence):
        raise InputError("choose --facts, --conditions or --norm-equivalence")
    u = parse_growth_spec(args.fn)
    a_values = parse_floats(args.a)
    for fact in _named_list(args.facts, FACTS, "fact") if args.facts else []:
        if fact == "l-bound":
            reports = [transforms.verify_l_bound(u, a) for a in a_values]
        elif fact == "l-scaling":
            reports = [transforms.verify_l_scaling(u, args.k)]
        elif fact == "l-sqrt-bound":
            reports = [transforms.verify_l_sqrt_bound(u, args.k, a) for a in a_values]
        else:
            reports = [transforms.verify_dual_legendre_identity(u, parse_grid(args.t), rtol=args.tol)]
        for r in reports:
            rep.check(f"{fact}", r.verdict == HOLDS, function=u.label, report=r.to_dict())
    for cond in _named_list(args.conditions, CONDITIONS, "condition") if args.conditions else []:
        if cond.startswith("U"):
            r = growth.check_U_condition(u, cond)
        elif cond == "log-exp-convex":
            r = growth.check_convexity_class(u, "log-exp")
        else:
            r = growth.check_convexity_class(u, "log-xk", 2.0)
        rep.check(cond, r.verdict == HOLDS, function=u.label, report=r.to_dict())
    if args.norm_equivalence:
        space = make_space(args)
        p1, p2 = pair(parse_floats(args.p), "p")
        q1, q2 = pair(parse_floats(args.q), "q")
        try:
            res = chaos.norm_equivalence_experiment(space, u, u, p1, p2, q1, q2, n_samples=args.samples,
                                                    degree=args.degree, seed=args.seed, strict=False)
        except chaos.PreconditionError as exc:
            raise InputError(str(exc)) from None
        rep.add("norm-equivalence", function=u.label, space=space.to_dict(),
                **{k: v for k, v in res.items() if k not in ("sup_by_norm", "norm_by_sup")},
                sup_by_norm={k: v for k, v in res["sup_by_norm"].items() if k != "ratios"},
                norm_by_sup=None if res["norm_by_sup"] is None else {k: v for k, v in res["norm_by_sup"].items() if k != "ratios"})
        rep.check("norm-equivalence-sup-by-norm", res["sup_by_norm"]["all_pass"], max_ratio=res["sup_by_norm"]["max_ratio"])
        rep.check("norm-equivalence-norm-by-sup-precondition", all(res["norm_by_sup_precondition"]),
                  factors=res["norm_by_sup_factor"])
        if res["norm_by_sup"] is not None:
            rep.check("norm-equivalence-norm-by-sup", res["norm_by_sup"]["all_pass"], max_ratio=res["norm_by_sup"]["max_ratio"])


def _fixture(name, space, seed):
    rng = np.random.default_rng(seed)
    if name in ("polynomial", "inflated"):
        phi = chaos.random_chaos(space, 3, rng)
        return analytic.AnalyticFunction.from_chaos_s_transform(phi), phi
    if name == "exponential":
        xi0 = 0.5 * rng.standard_normal(space.d)
        eta0 = 0.5 * rng.standard_normal(space.d)

        def F(xi, eta):
            return np.exp(2.0 * (xi @ xi0) + 2.0 * (eta @ eta0))

        return analytic.AnalyticFunction(space.d, F), None
    raise InputError(f"unknown fixture {name!r}")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def cmd_characterize(args, rep):
    space = make_space(args)
    phi = None
    if args.poly:
        obj = _load_json(args.poly)
        if obj.get("d") != space.d:
            raise InputError(f"polynomial has d={obj.get('d')} but the space has d={space.d}")
        F = analytic.AnalyticFunction.from_polynomial(space.d, obj["terms"])
        label = args.poly
    elif args.chaos:
        phi = chaos.from_json(_load_json(args.chaos))
        space = phi.space
        F = analytic.AnalyticFunction.from_chaos_s_transform(phi)
        label = args.chaos
    else:
        F, phi = _fixture(args.fixture, space, args.seed)
        label = args.fixture
    u = parse_growth_spec(args.fn)
    L = M = args.degree
    if phi is not None:
        L, M = phi.max_degrees
        rec = analytic.reconstruct_chaos(F, L, M, space)
        err = 0.0
        for key, k in phi.kernels.items():
            got = rec.kernels.get(key)
            for kk, v in k.entries.items():
                g = got.entries.get(kk, 0j) if got else 0j
                err = max(err, abs(g - v) / max(abs(v), 1e-300))
        rep.check("round-trip", err <= args.tol, fixture=label, max_rel_error=err)
    cert = analytic.check_growth_condition(F, u, u, args.K, args.K, args.p, args.p, space, seed=args.seed)
    rep.check("growth-condition", cert.holds, fixture=label, C_hat=cert.C_hat, log_C_hat=cert.log_C_hat,
              sample=cert.sample, witnesses=cert.witnesses[:3])
    if not cert.holds:
        return
    mono = analytic.extract_all(F, L, M)
    kernels = [analytic._kernel_from_monomials(mono, space.d, l, m)
               for l in range(L + 1) for m in range(M + 1)]
    if args.fixture == "inflated" and not (args.poly or args.chaos):
        i = max(range(len(kernels)), key=lambda j: kernels[j].sqnorm(space))
        kernels[i] = kernels[i].scale(1e6)
    kb = analytic.verify_kernel_bounds(kernels, space, cert.C_hat, args.K, args.K, args.p, args.p,
                                       args.q, args.q, u, u, direction="dual")
    rep.check("kernel-bounds", kb.verdict == HOLDS, fixture=label, margin=kb.margin,
              witness=kb.witness, rows=kb.details["rows"])


def cmd_measure(args, rep):
    space = make_space(args)
    try:
        nu1 = measures.parse_measure_spec(args.nu1, space.d)
        nu2 = measures.parse_measure_spec(args.nu2, space.d)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    model = measures.ProductMeasureModel(nu1, nu2, space)
    u1 = parse_growth_spec(args.fn)
    u2 = parse_growth_spec(args.fn2 or args.fn)
    p1, p2 = pair(parse_floats(args.p), "p")
    est = measures.integrability_estimate(model, u1, u2, p1, p2, n=args.n, seed=args.seed,
                                          n_batches=args.batches, level=args.level)
    config = {"nu1": nu1.label, "nu2": nu2.label, "u1": u1.label, "u2": u2.label, "p": [p1, p2],
              "space": space.to_dict()}
    exact = None
    if nu1.kind == nu2.kind == "gaussian" and u1.name == u2.name == "exp":
        exact = measures.integrability_exact_gaussian(nu1.sigmas ** 2, nu2.sigmas ** 2, p1, p2, space)
    rep.add("integrability", **est.to_dict(), exact_gaussian=exact, config=config)
    rep.check("integrability-condition", est.converged, integral=est.estimate, ci=est.ci)
    if args.boundedness and est.converged:
        b = measures.boundedness_probe(model, u1, u2, p1, p2, family_size=args.family, n=args.n,
                                       seed=args.seed, n_batches=args.batches, level=args.level)
        rep.check("boundedness", b.verdict == HOLDS, **b.to_dict())
    if args.positivity:
        pr = measures.positivity_probe(model, family_size=args.family, seed=args.seed, n=args.n,
                                       n_batches=args.batches, level=args.level)
        rep.check("positivity", pr.verdict == measures.NO_VIOLATION, **pr.to_dict())
    if args.pseudo_positivity:
        if space.d != 1 and args.D > 4:
            raise InputError("--D above 4 is only supported for d = 1")
        try:
            Xi = measures.moment_matrix(nu1, nu2, args.D)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        pp = measures.pseudo_positivity_probe(Xi, space.d, args.D, family_size=args.family,
                                              seed=args.seed, cross_check=est)
        rep.check("pseudo-positivity", pp.verdict == measures.NO_VIOLATION, **pp.to_dict())
    if args.omega is not None:
        ob = measures.omega_bound_check(u1, u2, args.omega, args.omega, space, seed=args.seed)
        rep.check("omega-bound", ob.verdict == HOLDS, margin=ob.margin, witness=ob.witness)


COMMANDS = {"transform": cmd_transform, "verify": cmd_verify,
            "characterize": cmd_characterize, "measure": cmd_measure}


# ------------------------------------------------------------ parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=1e-6)
    g.add_argument("--out", default=None, help="results file; the config goes to <out>.config")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--config", default=None, help="flat key = value file mirroring the flags")

    parser = argparse.ArgumentParser(prog="cksgrowth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    t = sub.add_parser("transform", parents=[common], help="Legendre, dual, L-function and weight tables")
    t.add_argument("--fn", default="exp")
    t.add_argument("--legendre", action="store_true")
    t.add_argument("--dual", action="store_true")
    t.add_argument("--lfunction", action="store_true")
    t.add_argument("--weights", action="store_true")
    t.add_argument("--t", default="0:10:0.5")
    t.add_argument("--r", default="0:10:0.5")
    t.add_argument("--n", type=parse_count, default=20)

    v = sub.add_parser("verify", parents=[common], help="inequalities, growth conditions, norm equivalence")
    v.add_argument("--fn", default="exp")
    v.add_argument("--facts", default=None, help="all or a list of " + ",".join(FACTS))
    v.add_argument("--conditions", default=None, help="all or a list of " + ",".join(CONDITIONS))
    v.add_argument("--a", default="2,e")
    v.add_argument("--k", type=int, default=2)
    v.add_argument("--t", default="0.1:30:0.1")
    v.add_argument("--norm-equivalence", action="store_true")
    v.add_argument("--d", type=int, default=None)
    v.add_argument("--lambda", default="2")
    v.add_argument("--p", default="1")
    v.add_argument("--q", default="3")
    v.add_argument("--samples", type=parse_count, default=100)
    v.add_argument("--degree", type=parse_count, default=3)

    c = sub.add_parser("characterize", parents=[common], help="kernel extraction and growth bounds")
    c.add_argument("--fixture", choices=("polynomial", "exponential", "inflated"), default="polynomial")
    c.add_argument("--poly", default=None, help="JSON {d, terms: [{idx_l, idx_m, re, im}]}")
    c.add_argument("--chaos", default=None, help="chaos vector JSON")
    c.add_argument("--fn", default="exp")
    c.add_argument("--d", type=int, default=None)
    c.add_argument("--lambda", default="2,3")
    c.add_argument("--K", type=float, default=1.0)
    c.add_argument("--p", type=float, default=0.0)
    c.add_argument("--q", type=float, default=1.0)
    c.add_argument("--degree", type=parse_count, default=4)

    m = sub.add_parser("measure", parents=[common], help="integrability and positivity of product measures")
    m.add_argument("--nu1", default="gaussian:sigma=1")
    m.add_argument("--nu2", default="gaussian:sigma=1")
    m.add_argument("--fn", default="exp")
    m.add_argument("--fn2", default=None)
    m.add_argument("--p", default="0.5")
    m.add_argument("--d", type=int, default=None)
    m.add_argument("--lambda", default="2")
    m.add_argument("--n", type=parse_count, default=100_000)
    m.add_argument("--batches", type=parse_count, default=20)
    m.add_argument("--level", type=float, default=0.99)
    m.add_argument("--boundedness", action="store_true")
    m.add_argument("--positivity", action="store_true")
    m.add_argument("--pseudo-positivity", action="store_true")
    m.add_argument("--D", type=parse_count, default=4)
    m.add_argument("--family", type=parse_count, default=50)
    m.add_argument("--omega", type=float, default=None, help="q for the omega bound check")
    return parser, sub.choices


def read_config(path):
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise InputError(f"{path}:{lineno}: expected key = value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def write_config(args):
    lines = []
    for k in sorted(vars(args)):
        v = getattr(args, k)
        if k in _NOT_CONFIG or v is None or v is False:
            continue
        lines.append(f"{k} = {'true' if v is True else v}")
    return "\n".join(lines) + "\n"


def _apply_config(subparser, values, path):
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in values.items():
        if key == "command":
            continue
        if key not in actions or key in _NOT_CONFIG:
            raise InputError(f"{path}: unknown key {key!r}")
        a = actions[key]
        if isinstance(a, argparse._StoreTrueAction):
            if value.lower() not in ("true", "false"):
                raise InputError(f"{path}: {key} must be true or false")
            defaults[key] = value.lower() == "true"
        else:
            defaults[key] = value  # argparse applies `type` to string defaults
    subparser.set_defaults(**defaults)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config", default=None)
        known, _ = pre.parse_known_args(argv)
        if known.config:
            values = read_config(known.config)
            command = next((a for a in argv if a in subparsers), None)
            if command is None:
                command = values.get("command")
                if command not in subparsers:
                    raise InputError(f"{known.config}: missing or unknown command")
            else:
                argv.remove(command)
            # global flags live on the subcommands, so the command goes first
            argv.insert(0, command)
            _apply_config(subparsers[command], values, known.config)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_INPUT if exc.code else EXIT_OK
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_INPUT
        rep = Report(args.command)
        COMMANDS[args.command](args, rep)
    except (InputError, ParseError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (transforms.DivergentTransformError, transforms.TruncationError, FloatingPointError) as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    config_text = write_config(args)
    config_record = {"record": "config", **{k: v for k, v in sorted(vars(args).items())
                                            if k not in _NOT_CONFIG}}
    text = render([config_record] + rep.records + [rep.summary()], args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        with open(args.out + ".config", "w") as fh:
            fh.write(config_text)
    else:
        sys.stdout.write(text)
    return rep.exit_code()


if __name__ == "__main__":
    sys.exit(main())
