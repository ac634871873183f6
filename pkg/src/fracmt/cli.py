"""Command-line front end: ``fracmt <command> [options]``.

Every command writes one report (CSV by default, JSON with ``--format
json``) to ``--out`` or stdout.  Exit status is 0 on success, 2 for bad
input, 3 when a quadrature budget is exhausted and 4 when the output cannot
be written; failures also print a JSON object on stderr.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from .constants import Params, alpha_star, gamma_s
from .errors import AccuracyError, InputError
from .function_models import GridFunction, MoserFunction, lp_norm_p
from .mt_functional import (
    WEIGHTS,
    MTConfig,
    concentration_fn_check,
    extremal_search,
    mt_integral,
    sharpness_scan,
)
from .quadrature import QuadratureSpec
from .rearrangement import polya_szego_gap, rearrange
from .reports import ScanReport, emit_report
from .seminorm import gagliardo_p_pl, moser_decomposition, rate_check

EXIT_INPUT = 2
EXIT_ACCURACY = 3
EXIT_IO = 4


class _OutputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors become JSON error objects (exit 2)."""

    def error(self, message):
        _fail(EXIT_INPUT, "input", f"{self.prog}: {message}")


def _fail(code, kind, message, **extra):
    payload = {"error": kind, "message": message, **extra}
    sys.stderr.write(json.dumps(payload) + "\n")
    raise SystemExit(code)


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise InputError("empty list")
    return values


def _domain(text):
    vals = _float_list(text)
    if len(vals) != 2:
        raise InputError("domain must be given as a,b")
    return tuple(vals)


def thread_cap():
    """Parallelism cap from FRACMT_THREADS (0 or unset: automatic).

    All kernels reduce in a fixed order, so the cap never changes results.
    """
    raw = os.environ.get("FRACMT_THREADS", "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"FRACMT_THREADS must be a non-negative integer, got {raw!r}") from None
    if value < 0:
        raise InputError(f"FRACMT_THREADS must be a non-negative integer, got {raw!r}")
    return value


def _spec(args):
    return QuadratureSpec(rel_tol=args.rel_tol, abs_tol=args.abs_tol, max_panels=args.max_panels)


def _params(args):
    return Params(args.s)


def _alpha(args, params):
    if args.alpha is not None:
        return args.alpha
    return args.alpha_mult * alpha_star(params)


def _read_grid(path):
    try:
        return GridFunction.from_csv(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


# -- commands ----------------------------------------------------------------


def cmd_constants(args):
    params = _params(args)
    rep = gamma_s(params, args.method, _spec(args))
    out = ScanReport(("s", "p", "gamma_s", "alpha_star", "method", "est_error"))
    out.append(params.s, params.p, rep.gamma_s, rep.alpha_star, rep.method, rep.est_error)
    return out


def cmd_seminorm(args):
    params = _params(args)
    u = _read_grid(args.input)
    value, err = gagliardo_p_pl(u, params, _spec(args), return_error=True)
    lp = lp_norm_p(u, params.p)
    out = ScanReport(("s", "seminorm_p", "error", "lp_p", "full_norm_p"))
    out.append(params.s, value, err, lp, value + lp)
    return out


def cmd_moser_table(args):
    params = _params(args)
    spec = _spec(args)
    out = ScanReport(("eps", "i1", "i2", "i3", "i4", "total", "gap", "log_rate"), meta={"s": params.s})
    for e in _float_list(args.eps):
        d = moser_decomposition(e, params, spec)
        out.append(d.eps, d.i1, d.i2, d.i3, d.i4, d.total, d.gamma_gap, d.log_rate)
    return out


def cmd_rate(args):
    return rate_check(_float_list(args.eps), _params(args), args.mode, _spec(args))


def cmd_rearrange(args):
    u = _read_grid(args.input)
    params = Params(args.s) if args.s is not None else None
    pair = rearrange(u, params, _spec(args))
    try:
        pair.rearranged.to_csv(args.output)
    except OSError as exc:
        raise _OutputError(f"cannot write {args.output}: {exc.strerror or exc}") from None
    out = ScanReport(("n_nodes", "lp_drift", "seminorm_gap"), meta={"output": str(args.output)})
    out.append(int(u.nodes.size), pair.lp_drift, pair.seminorm_gap)
    return out


def cmd_polya_szego(args):
    params = _params(args)
    spec = _spec(args)
    pair = rearrange(_read_grid(args.input), params=None)
    original, e1 = gagliardo_p_pl(pair.original, params, spec, return_error=True)
    star, e2 = gagliardo_p_pl(pair.rearranged, params, spec, return_error=True)
    gap = polya_szego_gap(pair, params, spec)
    out = ScanReport(("seminorm_original", "seminorm_rearranged", "gap", "error"))
    out.append(original, star, gap, e1 + e2)
    return out


def _norm_name(text):
    return "full_norm" if text == "full" else text


def cmd_mt(args):
    params = _params(args)
    spec = _spec(args)
    u = _read_grid(args.input)
    variant = "exp_interval" if args.variant == "exp" else "phi_line"
    config = MTConfig(_alpha(args, params), params, _norm_name(args.norm), args.weight, variant)
    domain = _domain(args.domain) if args.domain else (u.support if variant == "exp_interval" else None)
    value = mt_integral(u, config, domain, spec)
    out = ScanReport(("alpha", "variant", "normalization", "weight", "value"))
    out.append(config.alpha, variant, config.normalization, args.weight or "none", value)
    return out


def cmd_sharpness(args):
    params = _params(args)
    variant = "exp_interval" if args.variant == "exp" else "phi_line"
    config = MTConfig(_alpha(args, params), params, _norm_name(args.norm), args.weight, variant)
    return sharpness_scan(config, _float_list(args.eps), _spec(args))


def cmd_ruf_check(args):
    if args.samples < 1:
        raise InputError("--samples must be positive")
    t = (np.arange(args.samples) + 0.5) / args.samples
    rep = concentration_fn_check(args.s, args.r0, t)
    out = ScanReport(("s", "r0", "tau", "sigma", "t2", "max_f", "passed"))
    out.append(args.s, args.r0, rep.tau, rep.sigma, rep.t2, rep.max_f, rep.passed)
    return out


def cmd_extremal(args):
    params = _params(args)
    variant = "exp_interval" if args.variant == "exp" else "phi_line"
    config = MTConfig(_alpha(args, params), params, _norm_name(args.norm), None, variant)
    result = extremal_search(config, args.cells, args.iters, args.seed, _domain(args.domain), _spec(args))
    if args.best:
        try:
            result.best.to_csv(args.best)
        except OSError as exc:
            raise _OutputError(f"cannot write {args.best}: {exc.strerror or exc}") from None
    return result.trace


# -- parser ------------------------------------------------------------------


def _add_alpha(p, required=True):
    group = p.add_mutually_exclusive_group(required=required)
    group.add_argument("--alpha", type=float, help="exponent alpha")
    group.add_argument("--alpha-mult", type=float, help="exponent as a multiple of alpha*")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="report format (default csv)")
    common.add_argument("--out", default="-", help="report path, '-' for stdout")
    common.add_argument("--rel-tol", type=float, default=1e-10, help="relative quadrature tolerance")
    common.add_argument("--abs-tol", type=float, default=1e-13, help="absolute quadrature tolerance")
    common.add_argument("--max-panels", type=int, default=20000, help="panel budget per adaptive integral")

    parser = _Parser(prog="fracmt", description="Fractional seminorms and exponential functionals for s*p = 1.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    p = add("constants", cmd_constants, "gamma_s and alpha* for a given s")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--method", choices=("series", "integral"), default="series")

    p = add("seminorm", cmd_seminorm, "seminorm of a grid function read from CSV")
    p.add_argument("--input", required=True, help="CSV with header x,u")
    p.add_argument("--s", type=float, required=True)

    p = add("moser-table", cmd_moser_table, "four-part decomposition of the Moser seminorms")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--eps", required=True, help="comma-separated eps values")

    p = add("rate", cmd_rate, "convergence of the Moser family toward gamma_s")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--eps", required=True, help="comma-separated, strictly decreasing")
    p.add_argument("--mode", choices=("seminorm", "full"), default="seminorm")

    p = add("rearrange", cmd_rearrange, "symmetric decreasing rearrangement of a uniform grid function")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="CSV path for the rearranged function")
    p.add_argument("--s", type=float, help="also report the seminorm gap for this s")

    p = add("polya-szego", cmd_polya_szego, "seminorm before and after rearrangement")
    p.add_argument("--input", required=True)
    p.add_argument("--s", type=float, required=True)

    p = add("mt", cmd_mt, "exponential functional of a grid function")
    p.add_argument("--input", required=True)
    p.add_argument("--s", type=float, required=True)
    _add_alpha(p)
    p.add_argument("--variant", choices=("exp", "phi"), required=True)
    p.add_argument("--weight", choices=sorted(WEIGHTS))
    p.add_argument("--norm", choices=("seminorm", "full", "none"), default="seminorm")
    p.add_argument("--domain", help="a,b (default: the grid support for exp, the line for phi)")

    p = add("sharpness", cmd_sharpness, "functional along the Moser family")
    p.add_argument("--s", type=float, required=True)
    _add_alpha(p)
    p.add_argument("--eps", required=True)
    p.add_argument("--weight", choices=sorted(WEIGHTS))
    p.add_argument("--norm", choices=("seminorm", "full"), default="seminorm")
    p.add_argument("--variant", choices=("exp", "phi"), default="exp")

    p = add("ruf-check", cmd_ruf_check, "monotonicity check of (1-t)(1+tau t)^sigma")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--r0", type=float, required=True)
    p.add_argument("--samples", type=int, default=1000)

    p = add("extremal", cmd_extremal, "projected gradient ascent over the unit ball")
    p.add_argument("--s", type=float, required=True)
    _add_alpha(p)
    p.add_argument("--cells", type=int, required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--variant", choices=("exp", "phi"), default="exp")
    p.add_argument("--norm", choices=("seminorm", "full"), default="seminorm")
    p.add_argument("--domain", default="-1,1")
    p.add_argument("--best", help="CSV path for the best grid function")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        thread_cap()
        report = args.func(args)
    except InputError as exc:
        _fail(EXIT_INPUT, "input", str(exc))
    except AccuracyError as exc:
        estimate = exc.estimate if math.isfinite(exc.estimate) else None
        error = exc.error if math.isfinite(exc.error) else None
        _fail(EXIT_ACCURACY, "accuracy", str(exc), estimate=estimate, error_estimate=error)
    except _OutputError as exc:
        _fail(EXIT_IO, "io", str(exc))
    try:
        emit_report(report, args.format, args.out)
    except OSError as exc:
        _fail(EXIT_IO, "io", f"cannot write {args.out}: {exc.strerror or exc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
