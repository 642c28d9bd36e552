"""Command-line front end: ``cvlab <command> [options]``.

Every command prints one JSON document (or a CSV projection of its rows)
to stdout or ``--out``.  Exit status is 0 on success, 2 for invalid input
and 3 for numeric or resource failures.
"""
import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .bell_engine import DisplacementSpec, bell_correlation, bound_report, smsv_bound
from .exceptions import InputError, NumericError, ResourceError
from .gram_kernel import KernelSettings, gram
from .grid_oracle import build_basis, grid_bell_correlation, grid_norm
from .nchv_oracle import classical_max, load_table, nchv_feasible
from .optimizer import angles_from_spec, optimize_bin_width, optimize_orientations
from .partition import Partition
from .spin_algebra import bell_operator, center_hop_spec, lowering_spec, random_spec, spectral_norm, tsirelson_bound
from .states import make_max_violation, make_squeezed_coherent
from .wigner import WignerSettings, wigner_grid

SCHEMA_VERSION = 1
VACUUM_SIGMA = math.sqrt(0.5)
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}\n{self.format_usage()}")


def _int_list(text):
    try:
        out = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _float_list(n):
    def parse(text):
        try:
            out = [float(v) for v in str(text).split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}") from None
        if len(out) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        return out
    return parse


def _add_common(sp):
    sp.add_argument("--out", help="write the result here instead of stdout")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--config", help="JSON file of option defaults (a RunConfig)")
    sp.add_argument("--eps", type=float, default=1e-10, help="Gaussian tail bound")
    sp.add_argument("--tol", type=float, default=1e-8, help="quadrature tolerance")
    sp.add_argument("--s-max", type=int, default=64, help="largest |s| block summed")
    sp.add_argument("--dump-kernel", metavar="PATH", help="write the overlap kernel of the first row as CSV")
    sp.add_argument("--trace", action="store_true", help="include optimizer iterates")


def _add_state(sp, N="3", ratio=1.8, sigma=1.0):
    sp.add_argument("--N", type=_int_list, default=_int_list(N), help="comma-separated qubit counts")
    sp.add_argument("--ratio", type=float, default=ratio, help="bin width a over sigma")
    sp.add_argument("--sigma", type=float, default=sigma)
    sp.add_argument("--variant", type=int, choices=(1, 2), default=1)


def _add_grid(sp):
    sp.add_argument("--P", type=int, default=200, help="grid points per sub-interval")
    sp.add_argument("--s-range", type=_float_list(2), default=[-3, 3], help="block range lo,hi of the grid")


def build_parser():
    parser = _Parser(prog="cvlab", description="Pseudo-spin Bell correlations of a single quadrature mode.")
    parser.add_argument("--version", action="version", version=f"cvlab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("smsv", help="squeezed-vacuum violation over a list of N")
    _add_common(sp)
    _add_state(sp, N="3,5,7")
    sp.add_argument("--engine", choices=("analytic", "grid", "both"), default="analytic")
    _add_grid(sp)

    sp = sub.add_parser("maxstate", help="two-bin maximal-violation state")
    _add_common(sp)
    sp.add_argument("--N", type=_int_list, default=[3])
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--variant", type=int, choices=(1, 2), default=1)
    sp.add_argument("--s-trunc", type=int, default=256)
    sp.add_argument("--engine", choices=("analytic", "grid", "both"), default="analytic")
    _add_grid(sp)

    sp = sub.add_parser("coherent", help="displaced-state covariance demo")
    _add_common(sp)
    _add_state(sp, N="3", sigma=VACUUM_SIGMA)
    sp.add_argument("--qbar", type=float, default=0.0)
    sp.add_argument("--pbar", type=float, default=0.0)

    sp = sub.add_parser("classical-max", help="hidden-variable maximum by enumeration")
    _add_common(sp)
    sp.add_argument("--N", type=_int_list, default=[3])
    sp.add_argument("--variant", type=int, choices=(1, 2), default=1)
    sp.add_argument("--cap", type=int, default=10)
    sp.add_argument("--table", help="JSON correlation table to test for hidden-variable feasibility")

    sp = sub.add_parser("bounds", help="spectral-norm audit over random orientations")
    _add_common(sp)
    sp.add_argument("--N", type=_int_list, default=[2, 3, 4])
    sp.add_argument("--variant", type=int, choices=(1, 2), default=1)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("oracle-compare", help="analytic kernel against the brute-force grid")
    _add_common(sp)
    _add_state(sp, N="2,3")
    sp.add_argument("--state", choices=("smsv", "maxstate"), default="smsv")
    sp.add_argument("--theta", type=float, default=0.0)
    _add_grid(sp)

    sp = sub.add_parser("optimize-a", help="bin width maximising the squeezed-vacuum factor")
    _add_common(sp)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--N", type=int, default=3)
    sp.add_argument("--bracket", type=_float_list(2), default=[0.1, 2.0])
    sp.add_argument("--mu-tol", type=float, default=1e-6)

    sp = sub.add_parser("optimize-orient", help="numerical search over measurement orientations")
    _add_common(sp)
    _add_state(sp, N="3")
    sp.add_argument("--state", choices=("smsv", "maxstate"), default="smsv")
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--restarts", type=int, default=16)
    sp.add_argument("--seed", type=int, required=True)

    sp = sub.add_parser("wigner", help="Wigner function on a phase-space grid")
    _add_common(sp)
    sp.add_argument("--state", choices=("gaussian", "maxstate"), default="gaussian")
    sp.add_argument("--sigma", type=float, default=VACUUM_SIGMA)
    sp.add_argument("--qbar", type=float, default=0.0)
    sp.add_argument("--pbar", type=float, default=0.0)
    sp.add_argument("--N", type=int, default=3)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--s-trunc", type=int, default=1)
    sp.add_argument("--window", type=_float_list(4), default=[-4, 4, -4, 4], help="x_lo,x_hi,p_lo,p_hi")
    sp.add_argument("--steps", type=int, default=41)
    sp.add_argument("--half-width", type=float, help="u half-window of the numeric transform")
    return parser, sub


def _settings(args):
    return KernelSettings(eps=args.eps, tol=args.tol, s_max=args.s_max)


def _positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise InputError(f"--{name} must be positive, got {value!r}")


def _record(state, N, a, sigma, qbar, pbar, variant, value, engine, s_max, tail_bound, **extra):
    rep = bound_report(value, N)
    row = {
        "state": state, "N": N, "a": a, "sigma": sigma, "qbar": qbar, "pbar": pbar, "variant": variant,
        "value": value, "nchv_bound": rep.nchv_bound, "tsirelson_bound": rep.tsirelson_bound,
        "ratio": rep.violation_ratio, "factor": value / rep.tsirelson_bound,
        "tsirelson_margin": rep.tsirelson_margin, "engine": engine, "s_max": s_max, "tail_bound": tail_bound,
    }
    row.update(extra)
    return row


def _grid_row(state_name, wf, p, spec, args, sigma, **extra):
    lo, hi = (int(v) for v in args.s_range)
    basis = build_basis(p, (lo, hi), args.P)
    value = grid_bell_correlation(wf, spec, basis)
    return _record(state_name, p.N, p.a, sigma, 0.0, 0.0, spec.variant, value, "grid", max(abs(lo), abs(hi)),
                   None, P=args.P, s_range=[lo, hi], grid_norm=grid_norm(wf, basis), **extra)


def cmd_smsv(args, ctx):
    _positive("sigma", args.sigma)
    _positive("ratio", args.ratio)
    wf = make_squeezed_coherent(args.sigma)
    rows = []
    for N in args.N:
        p = Partition(args.ratio * args.sigma, N)
        spec = center_hop_spec(N, args.variant)
        extra = {}
        if N % 2 == 1 and args.variant == 1:
            extra["s0_bound"] = smsv_bound(args.ratio / 2, N)
        if args.engine in ("analytic", "both"):
            k = gram(p, wf, _settings(args))
            ctx.setdefault("kernel", k)
            value, _ = bell_correlation(wf, p, spec, kernel=k)
            rows.append(_record("smsv", N, p.a, args.sigma, 0.0, 0.0, args.variant, value, "analytic",
                                k.s_max, k.tail_bound, eps=args.eps, **extra))
        if args.engine in ("grid", "both"):
            rows.append(_grid_row("smsv", wf, p, spec, args, args.sigma, **extra))
    return rows


def cmd_maxstate(args, ctx):
    _positive("a", args.a)
    rows = []
    for N in args.N:
        p = Partition(args.a, N)
        spec = lowering_spec(N, args.variant)
        if args.engine in ("analytic", "both"):
            wf = make_max_violation(p, args.theta, args.s_trunc)
            k = gram(p, wf, _settings(args))
            ctx.setdefault("kernel", k)
            value, _ = bell_correlation(wf, p, spec, kernel=k)
            rows.append(_record("maxstate", N, p.a, None, 0.0, 0.0, args.variant, value, "analytic",
                                args.s_trunc, k.tail_bound, theta=args.theta))
        if args.engine in ("grid", "both"):
            lo, hi = (int(v) for v in args.s_range)
            wf = make_max_violation(p, args.theta, min(abs(lo), abs(hi)))
            rows.append(_grid_row("maxstate", wf, p, spec, args, None, theta=args.theta))
    return rows


def cmd_coherent(args, ctx):
    _positive("sigma", args.sigma)
    _positive("ratio", args.ratio)
    disp = DisplacementSpec(args.qbar, args.pbar)
    rows = []
    for N in args.N:
        p = Partition(args.ratio * args.sigma, N)
        spec = center_hop_spec(N, args.variant)
        base = make_squeezed_coherent(args.sigma)
        moved = make_squeezed_coherent(args.sigma, args.qbar, args.pbar)
        v0, _ = bell_correlation(base, p, spec, settings=_settings(args))
        k = gram(p, moved, _settings(args), shift=disp.qbar)
        ctx.setdefault("kernel", k)
        value, _ = bell_correlation(moved, p, spec, disp, kernel=k)
        rows.append(_record("coherent", N, p.a, args.sigma, args.qbar, args.pbar, args.variant, value, "analytic",
                            k.s_max, k.tail_bound, undisplaced_value=v0, covariance_residual=abs(value - v0),
                            eps=args.eps))
    return rows


def cmd_classical_max(args, ctx):
    rows = []
    for N in args.N:
        best, assignment = classical_max(N, args.variant, cap=args.cap)
        row = {"N": N, "variant": args.variant, "value": float(best), "exact": str(best),
               "assignment": list(assignment), "engine": "enumeration"}
        if args.table:
            row["table_feasible"] = bool(nchv_feasible(load_table(args.table, N), N))
        rows.append(row)
    return rows


def cmd_bounds(args, ctx):
    if args.samples < 1:
        raise InputError("--samples must be positive")
    rng = np.random.default_rng(args.seed)
    rows = []
    for N in args.N:
        if not 1 <= N <= 10:
            raise InputError(f"bounds audit supports 1 <= N <= 10, got {N}")
        norms = [spectral_norm(bell_operator(random_spec(N, rng, args.variant))) for _ in range(args.samples)]
        tb = tsirelson_bound(N)
        rows.append({"N": N, "variant": args.variant, "samples": args.samples, "seed": args.seed,
                     "max_norm": max(norms), "tsirelson_bound": tb, "within_bound": max(norms) <= tb + 1e-9,
                     "construction_norm": spectral_norm(bell_operator(lowering_spec(N, args.variant))),
                     "engine": "dense"})
    return rows


def cmd_oracle_compare(args, ctx):
    _positive("sigma", args.sigma)
    rows = []
    lo, hi = (int(v) for v in args.s_range)
    for N in args.N:
        if args.state == "smsv":
            p = Partition(args.ratio * args.sigma, N)
            spec = center_hop_spec(N, args.variant)
            wf = make_squeezed_coherent(args.sigma)
        else:
            p = Partition(1.0, N)
            spec = lowering_spec(N, args.variant)
            wf = make_max_violation(p, args.theta, min(abs(lo), abs(hi)))
        k = gram(p, wf, _settings(args))
        ctx.setdefault("kernel", k)
        analytic, _ = bell_correlation(wf, p, spec, kernel=k)
        grid = grid_bell_correlation(wf, spec, build_basis(p, (lo, hi), args.P))
        rows.append({"state": args.state, "N": N, "a": p.a, "variant": args.variant, "analytic": analytic,
                     "grid": grid, "rel_err": abs(grid - analytic) / abs(analytic), "P": args.P,
                     "s_range": [lo, hi], "engine": "both", "tail_bound": k.tail_bound})
    return rows


def cmd_optimize_a(args, ctx):
    res = optimize_bin_width(args.sigma, args.N, args.bracket, args.mu_tol)
    row = dict(res.as_dict(args.trace), sigma=args.sigma, N=args.N, engine="golden-section")
    row["bound_at_best"] = smsv_bound(res.best_params["mu"], args.N)
    return [row]


def cmd_optimize_orient(args, ctx):
    rows = []
    for N in args.N:
        if args.state == "smsv":
            _positive("sigma", args.sigma)
            p = Partition(args.ratio * args.sigma, N)
            wf = make_squeezed_coherent(args.sigma)
            seed_angles = angles_from_spec(center_hop_spec(N))
        else:
            p = Partition(1.0, N)
            wf = make_max_violation(p, args.theta)
            seed_angles = angles_from_spec(lowering_spec(N))
        k = gram(p, wf, _settings(args))
        ctx.setdefault("kernel", k)
        res = optimize_orientations(k, p, args.variant, args.restarts, args.seed, seed_angles)
        rows.append(dict(res.as_dict(args.trace), state=args.state, N=N, a=p.a, variant=args.variant,
                         restarts=args.restarts, seed=args.seed, tsirelson_bound=tsirelson_bound(N),
                         engine="nelder-mead", tail_bound=k.tail_bound))
    return rows


def cmd_wigner(args, ctx):
    if args.steps < 1:
        raise InputError("--steps must be positive")
    if args.state == "gaussian":
        _positive("sigma", args.sigma)
        wf = make_squeezed_coherent(args.sigma, args.qbar, args.pbar)
        engine = "closed-form"
    else:
        wf = make_max_violation(Partition(args.a, args.N), args.theta, args.s_trunc)
        engine = "numeric"
    settings = WignerSettings(half_width=args.half_width)
    X, P, W = wigner_grid(wf, args.window, args.steps, settings)
    ctx["wigner_min"] = float(W.min())
    ctx["engine"] = engine
    return [{"x": float(x), "p": float(p), "W": float(w)} for x, p, w in zip(X.ravel(), P.ravel(), W.ravel())]


COMMANDS = {
    "smsv": cmd_smsv, "maxstate": cmd_maxstate, "coherent": cmd_coherent, "classical-max": cmd_classical_max,
    "bounds": cmd_bounds, "oracle-compare": cmd_oracle_compare, "optimize-a": cmd_optimize_a,
    "optimize-orient": cmd_optimize_orient, "wigner": cmd_wigner,
}


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InputError("config must be a JSON object")
    return cfg


def parse_args(argv):
    """Parse ``argv``; ``--config`` values fill in any option not given on the command line."""
    parser, sub = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = _load_config(known.config)
        command = cfg.pop("command", None)
        if command is not None and not any(a in COMMANDS for a in argv):
            argv = [command] + list(argv)
        chosen = next((a for a in argv if a in COMMANDS), None)
        if chosen is None:
            raise InputError("no command given on the command line or in the config")
        sp = sub.choices[chosen]
        dests = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, val in cfg.items():
            dest = key.replace("-", "_")
            if dest not in dests or dest in ("config", "help"):
                raise InputError(f"unknown config key {key!r} for {chosen}")
            action = dests[dest]
            if action.type is not None and not isinstance(val, (list, bool)):
                # scalars go through the same parser as the command line
                try:
                    val = action.type(str(val))
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise InputError(f"config key {key!r}: {exc}") from exc
            defaults[dest] = val
        sp.set_defaults(**defaults)
        for action in sp._actions:
            if action.dest in defaults:
                action.required = False
    args = parser.parse_args(argv)
    if args.command is None:
        raise InputError(parser.format_usage())
    return args


def _config_echo(args):
    skip = {"out", "format", "config", "dump_kernel"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def render(args, rows, ctx):
    if args.format == "csv":
        keys = list(dict.fromkeys(k for r in rows for k in r))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([json.dumps(r[k]) if isinstance(r.get(k), (list, dict)) else r.get(k, "") for k in keys])
        return buf.getvalue()
    doc = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": _config_echo(args), "rows": rows}
    if "wigner_min" in ctx:
        doc["wigner_min"] = ctx["wigner_min"]
        doc["engine"] = ctx["engine"]
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def run(argv):
    """Execute one command; returns the process exit status."""
    try:
        args = parse_args(list(argv))
        ctx = {}
        rows = COMMANDS[args.command](args, ctx)
        text = render(args, rows, ctx)
        if args.dump_kernel and "kernel" in ctx:
            ctx["kernel"].to_csv(args.dump_kernel)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (NumericError, ResourceError) as exc:
        print(f"cvlab: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ValueError, OSError) as exc:
        print(f"cvlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None):
    return run(sys.argv[1:] if argv is None else argv)
