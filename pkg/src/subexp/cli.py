"""Command-line front end: ``subexp <command> --model model.json [options]``.

Exit status: 0 success, 1 bad input or domain error, 2 numerical failure,
3 a validation band failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .asymptotics import closed_form, density_log_asym, mz_constant, tail_log_asym
from .errors import (ConfigurationError, DomainError, NumericalError, ResourceError,
                     StatisticalPowerError, SubexpError, UnsupportedRegimeError)
from .io import header_lines, load_model
from .levy import CompoundPoisson, exact_log_moments
from .psi import PsiEvaluator

EXIT_INPUT, EXIT_NUMERIC, EXIT_BAND = 1, 2, 3


class BandFailure(Exception):
    pass


def _floats(text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _fmt(v):
    return repr(float(v)) if np.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))


class _Output:
    def __init__(self, path):
        self.path = path
        self.lines = []

    def write(self, line):
        self.lines.append(line)

    def table(self, header, columns, meta):
        for h in meta:
            self.write(h)
        self.write(",".join(header))
        for row in zip(*columns):
            self.write(",".join(_fmt(v) for v in row))

    def close(self):
        text = "\n".join(self.lines) + "\n"
        if self.path:
            with open(self.path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _meta(args, model, **extra):
    return header_lines(model, command=args.command, seed=getattr(args, "seed", None),
                        tol=getattr(args, "tol", None), **extra)


# ---------------------------------------------------------------------------
# commands


def cmd_phi(args, model, out):
    x = np.asarray(args.t or np.geomspace(1e-3, 1e6, 46))
    ph = np.asarray(model.phi(x))
    d1 = np.asarray(model.phi_derivative(x, 1))
    out.table(["x", "phi", "phi_prime", "x_phi_prime_over_phi"], [x, ph, d1, x * d1 / ph],
              _meta(args, model))


def cmd_psi(args, model, out):
    ev = PsiEvaluator(model, root_tolerance=args.tol or 1e-12)
    x = np.asarray(args.t or ev.lower * np.geomspace(1, 1e4, 41))
    F = np.array([ev.exponent_integral(v) if v >= ev.lower else math.nan for v in x])
    out.table(["x", "psi", "psi_prime", "psi_second", "exponent_integral"],
              [x, ev.psi(x), ev.psi_prime(x), ev.psi_second(x), F],
              _meta(args, model, x_psi=ev.x_psi))


def cmd_integral(args, model, out):
    ev = PsiEvaluator(model, root_tolerance=args.tol or 1e-12)
    t = np.asarray(args.t or ev.lower * np.geomspace(1, 1e3, 31))
    out.table(["t", "exponent_integral"], [t, ev.exponent_integral(t)],
              _meta(args, model, lower_limit=ev.lower))


def cmd_tail(args, model, out):
    ev = PsiEvaluator(model, root_tolerance=args.tol or 1e-12)
    t = np.asarray(args.t or ev.lower * np.geomspace(1, 100, 21))
    cols = [t, tail_log_asym(ev, t), density_log_asym(ev, t)]
    header = ["t", "tail_log_asym", "density_log_asym"]
    extra = {}
    try:
        form = closed_form(model)
        cols.append(form.log_value_fn(t))
        header.append("closed_form_log")
        extra["closed_form"] = form.to_json()
    except UnsupportedRegimeError as exc:
        extra["closed_form"] = f"unavailable ({exc})"
    out.table(header, cols, _meta(args, model, **extra))


def _default_grid(model, ev):
    """[1e-2, 10 t*] where the exponent integral reaches 20 at t*."""
    t = ev.lower * 2.0
    while ev.exponent_integral(t) < 20.0:
        t *= 1.5
    return 1e-2 * min(1.0, 1.0 / ev.lower), 10.0 * t


def cmd_density(args, model, out):
    from . import fixed_point as fp

    ev = PsiEvaluator(model)
    lo, hi = _default_grid(model, ev)
    grid = fp.geometric_grid(lo, hi, args.grid or 512)
    res = fp.iterate_to_fprime(model, grid, tol=args.tol or 1e-10)
    k = fp.density_from_fprime(res)
    resid = fp.verify_integral_equation(k, model)
    meta = _meta(args, model, grid_points=grid.size, x_lo=lo, x_hi=hi,
                 iterations=res.iterations, converged=res.converged,
                 fixed_point_residual=res.residual, integral_equation_residual=resid,
                 mean_from_density=fp.density_moment(k), mean_exact=1.0 / float(model.phi(1.0)))
    out.table(["x", "fprime", "density", "trusted"],
              [grid, res.values, k.values, res.trusted.astype(float)], meta)
    print(f"integral-equation residual {resid:.3g} after {res.iterations} iterations",
          file=sys.stderr)


def _scheme(args, model):
    from .monte_carlo import SimScheme, default_scheme

    if args.eps is not None:
        if args.eps == 0:
            return SimScheme("affine_recursion")
        return SimScheme("compensated_path", eps=args.eps)
    return default_scheme(model)


def cmd_simulate(args, model, out):
    from .io import model_hash
    from .monte_carlo import sample_I, write_samples

    scheme = _scheme(args, model)
    s = sample_I(model, args.n or 100_000, seed=args.seed, scheme=scheme, t_list=args.t or (),
                 keep_samples=bool(args.raw))
    if args.raw:
        write_samples(args.raw, s.samples)
    d = s.to_dict()
    d["model_hash"] = model_hash(model)
    d["version"] = __version__
    out.write(json.dumps(d, indent=2, sort_keys=True))


def cmd_moments(args, model, out):
    n_max = args.n if args.n is not None else 10
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    lm = exact_log_moments(model, n_max)
    with np.errstate(over="ignore"):
        m = np.exp(lm)
    out.table(["order", "moment", "log_moment"], [np.arange(1, n_max + 1), m, lm],
              _meta(args, model))


def _band(report, name, ok, detail):
    report.append((name, bool(ok), detail))


def cmd_validate(args, model, out):
    """Moments, exact-sampler KS, slope law and constant fit, each against a band."""
    from scipy import stats

    from . import monte_carlo as mc

    n = args.n or 1_000_000
    report = []
    scheme = _scheme(args, model)
    s = mc.sample_I(model, n, seed=args.seed, scheme=scheme, keep_samples=True)
    x = s.samples
    p1, p2 = float(model.phi(1.0)), float(model.phi(2.0))
    for order, exact, approx in ((1, 1 / p1, s.exact_moments_eps[0]),
                                 (2, 2 / (p1 * p2), s.exact_moments_eps[1])):
        mean, se = s.moment(order)
        bias = abs(approx - exact)
        _band(report, f"moment_{order}", abs(mean - exact) <= 3 * se + bias,
              f"mc={mean:.6g} se={se:.3g} exact={exact:.6g} eps_bias={bias:.3g}")
    if mc.special_case(model):
        n_ks = min(n, 100_000)
        e = mc.exact_sampler_special(model, n_ks, seed=args.seed)
        ks = stats.ks_2samp(e, x[:n_ks])
        crit = 1.6276 * math.sqrt(2.0 / n_ks)
        _band(report, "ks_exact_sampler", ks.statistic < crit,
              f"D={ks.statistic:.4g} crit_1%={crit:.4g}")
    ev = PsiEvaluator(model)
    t = np.sort(x)
    # slope window: the upper end keeps at least 400 exceedances
    t_hi = float(t[-400]) if n >= 4000 else float(t[-1])
    t_lo = max(ev.lower, 0.7 * t_hi)
    if t_hi > t_lo:
        slope, half = mc.slope_check(x, t_lo, t_hi)
        theory = float(tail_log_asym(ev, t_lo) - tail_log_asym(ev, t_hi)) / (t_hi - t_lo)
        _band(report, "slope_law", abs(slope - theory) <= half,
              f"window=[{t_lo:.4g},{t_hi:.4g}] slope={slope:.5g} +-{half:.3g} theory={theory:.5g}")
        if isinstance(model, CompoundPoisson) and model.expansion() and \
                len(model.expansion()) == 1:
            window = np.linspace(t_lo, t_hi, 9)
            try:
                fit = mc.fit_cI(model, ev, x, window, convert_to=closed_form(model))
                c_fit, se = fit.c_hat, fit.stderr
                c_ref = mz_constant(model)
                _band(report, "c_I_fit", abs(c_fit - c_ref) <= 3 * se,
                      f"c_hat={c_fit:.5g} se={se:.3g} reference={c_ref:.10g} "
                      f"trend_z={fit.slope_z:.3g}")
            except StatisticalPowerError as exc:
                _band(report, "c_I_fit", True, f"skipped: {exc}")
    ok = all(r[1] for r in report)
    for line in _meta(args, model, n=n, eps=scheme.eps):
        out.write(line)
    out.write("check,status,detail")
    for name, good, detail in report:
        out.write(f"{name},{'PASS' if good else 'FAIL'},\"{detail}\"")
    if not ok:
        raise BandFailure(", ".join(r[0] for r in report if not r[1]))


COMMANDS = {"phi": cmd_phi, "psi": cmd_psi, "integral": cmd_integral, "tail": cmd_tail, "density": cmd_density,
            "simulate": cmd_simulate, "validate": cmd_validate, "moments": cmd_moments}


def build_parser():
    p = argparse.ArgumentParser(prog="subexp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        c = sub.add_parser(name)
        c.add_argument("--model", required=True, help="model JSON file")
        c.add_argument("--out", help="output file (default standard output)")
        c.add_argument("--t", type=_floats, help="comma-separated evaluation points")
        c.add_argument("--n", type=int, help="sample size, or n_max for moments")
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--eps", type=float, help="small-jump cutoff (0 = affine recursion)")
        c.add_argument("--grid", type=int, help="fixed-point grid points")
        c.add_argument("--tol", type=float, help="solver tolerance")
        if name == "simulate":
            c.add_argument("--raw", help="also write raw samples to this binary file")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    out = _Output(args.out)
    try:
        model = load_model(args.model)
        COMMANDS[args.command](args, model, out)
        out.close()
        return 0
    except BandFailure as exc:
        out.close()
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_BAND
    except (NumericalError, ResourceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ConfigurationError, UnsupportedRegimeError, StatisticalPowerError,
            SubexpError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
