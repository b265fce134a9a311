"""``glzeta`` command line.

Every subcommand validates its flags, computes, and writes JSON (or CSV
with ``--format csv``) to stdout.  Diagnostics go to stderr.

Exit codes: 0 success, 1 usage error, 2 domain or convergence error,
3 fit finished without meeting its tolerances (the partial result is
still printed).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (characteristic_function, local_dependence, moment_report)
from .errors import FitError, GLConvergenceError, GLDomainError
from .inference import (FitConfig, PARAMETER_NAMES, aic, fit, ks_test, load_dataset,
                        log_likelihood)
from .model import GLParams, LocationScale, Preset, cdf_univariate, log_pdf, preset
from .model import _PRESET_ARGS
from .radial import random_source, sample
from .structure import conditional, marginal_generator

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NOT_CONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# flag parsing helpers


def _floats(text: str, what: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _matrix(text: str, what: str) -> np.ndarray:
    rows = [_floats(r, what) for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise UsageError(f"{what}: rows must have equal length (separate rows with ';')")
    return np.array(rows)


def _key_values(text: str | None, what: str) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"{what}: expected key=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"{what}: {value!r} is not a number") from None
    return out


def _load_params_json(text: str) -> dict:
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text()
        except OSError as exc:
            raise UsageError(f"--params: cannot read {text[1:]}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params: invalid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise UsageError("--params: expected a JSON object")
    return doc


def _params(args, default: str | None = None) -> GLParams:
    """Resolve ``--preset`` and ``--params``.

    A preset that takes arguments receives ``--params`` as its arguments;
    otherwise ``--params`` overrides fields of the preset, or stands alone.
    """
    extra = _load_params_json(args.params) if args.params else {}
    name = args.preset or (None if extra else default)
    if name is None:
        if not extra:
            raise UsageError("one of --preset or --params is required")
        return GLParams.from_dict(extra)
    if _PRESET_ARGS.get(Preset(name)):
        return preset(name, **extra)
    base = preset(name)
    unknown = set(extra) - {"N", "a", "b", "s", "s1", "s2", "r"}
    if unknown:
        raise GLDomainError(f"unknown parameter(s): {sorted(unknown)}")
    return base.with_values(**extra)


def _location_scale(args, n: int) -> LocationScale:
    mu = np.array(_floats(args.mu, "--mu")) if args.mu else np.zeros(n)
    sigma = _matrix(args.sigma, "--sigma") if args.sigma else np.eye(n)
    if mu.shape != (n,) or sigma.shape != (n, n):
        raise UsageError(f"--mu/--sigma must describe dimension {n}")
    return LocationScale(mu, sigma)


def _emit(payload, fmt: str, header=None, rows=None, out=None):
    out = out or sys.stdout
    if fmt == "csv":
        if rows is None:
            raise UsageError("this command has no CSV form; use --format json")
        writer = csv.writer(out, lineterminator="\n")
        if header:
            writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                             for v in row])
    else:
        json.dump(payload, out, indent=2, default=_json_default)
        out.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _finite(value):
    """JSON has no infinities; map them to null."""
    return float(value) if math.isfinite(value) else None


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args):
    params = _params(args)
    point = np.array(_floats(args.point, "--point"))
    n = args.n if args.n is not None else point.size
    if point.size != n:
        raise UsageError(f"--point has {point.size} coordinates but --n is {n}")
    ls = _location_scale(args, n)
    lp = float(log_pdf(params, ls, point))
    payload = {"n": n, "params": params.to_dict(), "point": point.tolist(),
               "pdf": math.exp(lp), "log_pdf": _finite(lp)}
    _emit(payload, args.format, ["pdf", "log_pdf"], [[math.exp(lp), lp]])
    return EXIT_OK


def cmd_sample(args):
    params = _params(args)
    n = args.n or 1
    ls = _location_scale(args, n)
    if args.count < 1:
        raise UsageError("--count must be positive")
    draws = sample(params, ls, args.count, random_source(args.seed, args.stream))
    payload = {"n": n, "seed": args.seed, "stream": args.stream, "count": args.count,
               "params": params.to_dict(), "samples": draws.tolist()}
    _emit(payload, args.format, [f"x{i + 1}" for i in range(n)], draws.tolist())
    return EXIT_OK


def _data(args):
    if not args.data:
        raise UsageError("--data is required (a CSV/JSON path or 'table1')")
    return load_dataset(args.data)


def cmd_fit(args):
    data = _data(args)
    fixed = _key_values(args.fix, "--fix")
    initial = _key_values(args.init, "--init")
    cfg = FitConfig(fixed=fixed, initial=initial, restarts=args.restarts,
                    max_iterations=args.max_iter, xatol=args.tol, fatol=args.tol / 10.0)
    result = fit(data, cfg, random_source(args.seed))
    payload = result.to_dict()
    payload["data_source"] = data.source
    payload["fixed"] = sorted(fixed)
    for note in result.notes:
        print(f"note: {note}", file=sys.stderr)
    rows = [[k, v] for k, v in result.estimates.items()]
    _emit(payload, args.format, ["parameter", "estimate"], rows)
    if not result.converged:
        print("fit did not meet its tolerances; result is partial", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_gof(args):
    data = _data(args)
    params = _params(args)
    ll = log_likelihood(data, params, args.mu_1d, args.sigma2)
    d, p = ks_test(data, lambda x: cdf_univariate(params, args.mu_1d, args.sigma2, x))
    payload = {"params": params.to_dict(), "mu": args.mu_1d, "sigma2": args.sigma2,
               "n_observations": len(data), "log_likelihood": _finite(ll),
               "free_count": args.free_count,
               "aic": _finite(aic(args.free_count, ll)) if math.isfinite(ll) else None,
               "ks_statistic": d, "ks_p_value": p}
    _emit(payload, args.format, ["log_likelihood", "aic", "ks_statistic", "ks_p_value"],
          [[ll, aic(args.free_count, ll), d, p]])
    return EXIT_OK


def cmd_moments(args):
    params = _params(args)
    n = args.n or 1
    ls = _location_scale(args, n)
    products = [[int(v) for v in _floats(p, "--product")] for p in (args.product or [])]
    powers = _floats(args.powers, "--powers") if args.powers else (1.0, 2.0, 4.0)
    report = moment_report(params, ls, powers, products)
    _emit(report.to_dict(), args.format)
    return EXIT_OK


def cmd_cf(args):
    params = _params(args)
    n = args.n or 1
    ls = _location_scale(args, n)
    points = [np.array(_floats(t, "--t")) for t in (args.t or [])]
    if args.t_range:
        lo, hi, steps = _floats(args.t_range, "--t-range")
        if n != 1:
            raise UsageError("--t-range is for n = 1; pass --t for each vector otherwise")
        points += [np.array([v]) for v in np.linspace(lo, hi, int(steps))]
    if not points:
        raise UsageError("give at least one --t or a --t-range")
    rows, payload = [], []
    for t in points:
        if t.size != n:
            raise UsageError(f"--t {t.tolist()} has {t.size} coordinates, expected {n}")
        psi = characteristic_function(params, ls, t, args.method)
        payload.append([t.tolist() if n > 1 else float(t[0]), psi.real, psi.imag])
        rows.append([*t.tolist(), psi.real, psi.imag])
    _emit(payload, args.format, [*(f"t{i + 1}" for i in range(n)), "re", "im"], rows)
    return EXIT_OK


def _lattice(text: str, steps: int):
    lo, hi = _floats(text, "--range")
    if not hi > lo or steps < 2:
        raise UsageError("--range needs lo < hi and --steps >= 2")
    return np.linspace(lo, hi, steps)


def cmd_marginal(args):
    params = _params(args)
    n = args.n or 2
    m = args.m or 1
    if not 1 <= m < n:
        raise UsageError(f"--m must lie in [1, {n - 1}]")
    ls = _location_scale(args, n)
    gen = marginal_generator(params, n, m, args.method)
    grid = _lattice(args.range, args.steps)
    values = np.asarray(gen(grid), dtype=float)
    samples = [[float(t), float(v)] for t, v in zip(grid, values)]
    payload = {"n": n, "m": m, "method": args.method, "provenance": gen.provenance.value,
               "mu": ls.mu[:m].tolist(), "sigma": ls.sigma[:m, :m].tolist(),
               "log_constant": gen.log_constant(m), "generator_samples": samples}
    _emit(payload, args.format, ["t", "value"], samples)
    return EXIT_OK


def cmd_conditional(args):
    params = _params(args)
    n = args.n or 2
    ls = _location_scale(args, n)
    if args.m is None or not 1 <= args.m < n:
        raise UsageError(f"--m must lie in [1, {n - 1}]")
    given = np.array(_floats(args.given, "--given"))
    spec = conditional(params, ls, args.m, given, args.method)
    grid = _lattice(args.range, args.steps)
    values = np.asarray(spec.generator(grid), dtype=float)
    samples = [[float(t), float(v)] for t, v in zip(grid, values)]
    payload = {"m": spec.m, "mu": spec.mu_cond.tolist(), "sigma": spec.sigma_cond.tolist(),
               "q2": spec.q2, "generator_samples": samples}
    if args.point:
        x1 = np.array(_floats(args.point, "--point"))
        payload["point"] = x1.tolist()
        payload["pdf"] = float(spec.pdf(x1))
    _emit(payload, args.format, ["t", "value"], samples)
    return EXIT_OK


def _bivariate_grid(args, fn):
    if not -1.0 < args.rho < 1.0:
        raise GLDomainError(f"rho must lie in (-1, 1), got {args.rho}")
    axis = _lattice(args.range, args.steps)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    zz = fn(xx, yy)
    return np.column_stack([xx.ravel(), yy.ravel(), np.asarray(zz).ravel()])


def cmd_dependence(args):
    params = _params(args, default="logistic")
    rows = _bivariate_grid(args, lambda x, y: local_dependence(params, args.rho, x, y))
    payload = {"rho": args.rho, "params": params.to_dict(), "rows": rows.tolist()}
    _emit(payload, args.format or "csv", ["x", "y", "H"], rows.tolist())
    return EXIT_OK


def cmd_grid(args):
    params = _params(args, default="logistic")
    ls = LocationScale(np.zeros(2), np.array([[1.0, args.rho], [args.rho, 1.0]])) \
        if -1.0 < args.rho < 1.0 else None

    def density(x, y):
        pts = np.column_stack([x.ravel(), y.ravel()])
        return np.exp(log_pdf(params, ls, pts))

    rows = _bivariate_grid(args, density)
    payload = {"rho": args.rho, "params": params.to_dict(), "rows": rows.tolist()}
    _emit(payload, args.format or "csv", ["x", "y", "pdf"], rows.tolist())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _model_flags(p, n_default=None):
    p.add_argument("--preset", choices=[q.value for q in Preset],
                   help="named special case of the family")
    p.add_argument("--params", help="JSON object of parameters, inline or @file")
    p.add_argument("--n", type=int, default=n_default, help="dimension")


def _ls_flags(p):
    p.add_argument("--mu", help="location vector, comma separated")
    p.add_argument("--sigma", help="scale matrix, rows separated by ';'")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="glzeta", description="Generalized elliptical logistic distributions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name, func, help_text, default_format="json"):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=("json", "csv"),
                       default=None if default_format is None else default_format)
        return p

    p = add("eval", cmd_eval, "evaluate the density at one point")
    _model_flags(p)
    _ls_flags(p)
    p.add_argument("--point", required=True, help="comma-separated coordinates")

    p = add("sample", cmd_sample, "draw samples via the stochastic representation")
    _model_flags(p)
    _ls_flags(p)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)

    p = add("fit", cmd_fit, "maximum-likelihood fit of the univariate law")
    p.add_argument("--data", help="CSV/JSON file with one numeric column, 'table1', or '-' for stdin")
    p.add_argument("--fix", help=f"pinned values, e.g. N=1,a=1,s=1 (names: {', '.join(PARAMETER_NAMES)})")
    p.add_argument("--init", help="starting values for free parameters, key=value list")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9, help="simplex size tolerance")

    p = add("gof", cmd_gof, "log-likelihood, AIC and K-S test at given parameters")
    _model_flags(p)
    p.add_argument("--data")
    p.add_argument("--mu", dest="mu_1d", type=float, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--free-count", type=int, default=1)

    p = add("moments", cmd_moments, "mean, covariance, radial and product moments")
    _model_flags(p)
    _ls_flags(p)
    p.add_argument("--powers", help="radial moment orders, comma separated")
    p.add_argument("--product", action="append", help="product-moment orders, repeatable")

    p = add("cf", cmd_cf, "characteristic function values (t, Re, Im)")
    _model_flags(p)
    _ls_flags(p)
    p.add_argument("--t", action="append", help="argument vector, repeatable")
    p.add_argument("--t-range", help="lo,hi,steps for n = 1")
    p.add_argument("--method", default=None,
                   choices=("beta", "gamma-ratio", "pochhammer", "quadrature"))

    p = add("marginal", cmd_marginal, "generator of an m-dimensional marginal")
    _model_flags(p)
    _ls_flags(p)
    p.add_argument("--m", type=int)
    p.add_argument("--range", default="0,5")
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--method", choices=("quadrature", "series"), default="quadrature")

    p = add("conditional", cmd_conditional, "law of the first m coordinates given the rest")
    _model_flags(p)
    _ls_flags(p)
    p.add_argument("--m", type=int)
    p.add_argument("--given", required=True, help="values of the conditioning coordinates")
    p.add_argument("--point", help="evaluate the conditional density here")
    p.add_argument("--range", default="0,5", help="generator sample range lo,hi")
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--method", choices=("quadrature", "series"), default="quadrature")

    p = add("dependence", cmd_dependence, "local dependence H(x, y) on a grid", None)
    _model_flags(p)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--range", default="-3,3")
    p.add_argument("--steps", type=int, default=13)

    p = add("grid", cmd_grid, "bivariate density on a lattice", None)
    _model_flags(p)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--range", default="-3,3")
    p.add_argument("--steps", type=int, default=31)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GLDomainError, GLConvergenceError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
