"""Command-line entry point ``nssetd``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

from .config import ConfigError, load_config
from .series import atomic_write_text, read_series, write_series

log = logging.getLogger("nssetd")


def _window(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be 'lo,hi', got {text!r}")
    if not hi > lo:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nssetd", description="Regularized ETD solver for the NSS thin-film model.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("converge", help="manufactured-solution convergence study")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=1, help="parallel N values")
    p.add_argument("--out", help="CSV path (default <output dir>/convergence.csv)")

    p = sub.add_parser("run", help="coarsening run")
    p.add_argument("config")
    p.add_argument("--stop-time", type=float, help="stop early at this time and checkpoint")

    p = sub.add_parser("resume", help="continue a coarsening run from a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("config")
    p.add_argument("--stop-time", type=float)

    p = sub.add_parser("fit", help="least-squares scaling fit of a trace")
    p.add_argument("trace")
    p.add_argument("--kind", required=True, choices=("energy", "roughness", "slope"))
    p.add_argument("--window", type=_window, default=(10.0, 400.0), help="lo,hi (default 10,400)")
    p.add_argument("--gamma", type=float, help="energy floor for a saturation-time estimate")
    p.add_argument("--plot-script", metavar="PATH", help="write a gnuplot script overlaying the fit")

    p = sub.add_parser("constants", help="stability constants and the admissible A")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)

    p = sub.add_parser("check", help="property suites")
    p.add_argument("--suite", required=True, choices=("operators", "stability", "convexity"))
    return ap


def _cmd_converge(args) -> int:
    from .experiments import run_convergence

    cfg = load_config(args.config)
    res = run_convergence(cfg, workers=args.workers)
    print(f"{'N':>5} {'h':>12} {'dt':>12} {'err_l1':>12} {'err_l2':>12} {'err_linf':>12}")
    for N, h, dt, e1, e2, ei in res.rows:
        print(f"{N:>5d} {h:12.5e} {dt:12.5e} {e1:12.5e} {e2:12.5e} {ei:12.5e}")
    for name in ("l1", "l2", "linf"):
        print(f"order {name:>4}: {res.orders[name]:.4f} +/- {res.stderr[name]:.4f}")
    out = args.out or os.path.join(cfg.resolved_output_dir(), "convergence.csv")
    write_series(res, out)
    print(f"wrote {out}")
    return 0


def _report_trace(trace, out_dir):
    last = trace.rows[-1]
    print(f"t = {last.t:g} after {trace.meta['steps']} steps; energy {last.energy:.10g}, "
          f"roughness {last.roughness:.6g}, slope {last.slope:.6g}")
    print(f"wrote {os.path.join(out_dir, 'trace.csv')}")


def _cmd_run(args) -> int:
    from .experiments import run_coarsening

    cfg = load_config(args.config)
    out = cfg.resolved_output_dir()
    trace = run_coarsening(cfg, output_dir=out, stop_time=args.stop_time)
    _report_trace(trace, out)
    return 0


def _cmd_resume(args) -> int:
    from .experiments import run_coarsening

    cfg = load_config(args.config)
    out = cfg.resolved_output_dir()
    trace = run_coarsening(cfg, resume_from=args.checkpoint, output_dir=out, stop_time=args.stop_time)
    _report_trace(trace, out)
    return 0


def _cmd_fit(args) -> int:
    from .experiments import FIT_KINDS, fit_scaling, plot_script, saturation_estimate

    data = read_series(args.trace)
    column = FIT_KINDS[args.kind][0]
    if "t" not in data or column not in data:
        raise ValueError(f"{args.trace}: needs columns 't' and '{column}'")
    fit = fit_scaling(data, args.kind, window=args.window)
    form = "a ln t + b" if fit.model == "semilog" else "a t^b"
    print(f"{args.kind}: {form} on [{fit.window[0]:g}, {fit.window[1]:g}] with {fit.n} samples")
    print(f"a = {fit.a:.10g}")
    print(f"b = {fit.b:.10g}")
    print(f"residual rms = {fit.residual_rms:.3e}")
    if args.gamma is not None:
        print(f"saturation time t* = {saturation_estimate(fit, args.gamma):.6g}")
    if args.plot_script:
        atomic_write_text(args.plot_script, plot_script(fit, os.path.abspath(args.trace), column))
        print(f"wrote {args.plot_script}")
    return 0


def _cmd_constants(args) -> int:
    from .model import ModelParams, stability_constants

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        sc = stability_constants(ModelParams(eps=args.eps, kappa=args.kappa))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rows = [
        ("kappa", sc.kappa), ("eps", sc.eps), ("kappa0", sc.kappa0), ("kappa_star", sc.kappa_star),
        ("C4", sc.C4), ("gamma1", sc.gamma1), ("gamma2", sc.gamma2), ("gamma3", sc.gamma3),
        ("gamma0", sc.gamma0), ("alpha0", sc.alpha0), ("A_min", sc.A_min),
    ]
    for name, v in rows:
        print(f"{name:<11}= {v:.15g}")
    print(f"{'hypotheses':<11}= {'met' if sc.hypotheses_met else 'NOT met (kappa < 1/4)'}")
    return 0


def _cmd_check(args) -> int:
    from .checks import SUITES

    results = SUITES[args.suite]()
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}")
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} passed")
    return 0 if failed == 0 else 1


COMMANDS = {
    "converge": _cmd_converge,
    "run": _cmd_run,
    "resume": _cmd_resume,
    "fit": _cmd_fit,
    "constants": _cmd_constants,
    "check": _cmd_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"nssetd {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
