"""Command-line entry point: ``gufic run | compare | audit | validate``.

Exit codes: 0 success, 1 configuration or input error, 2 simulation error,
3 passivity audit failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import load_config
from .energy_audit import passivity_audit, write_margin_csv, write_report
from .errors import ConfigError, GuficError, LogFormatError, MissingChannel
from .plots import render_compare, render_plots
from .sim import simulate
from .simlog import SimLog

EXIT_OK, EXIT_CONFIG, EXIT_SIM, EXIT_AUDIT = 0, 1, 2, 3

log = logging.getLogger("gufic")


def configure_logging():
    """Root level from ``GUFIC_LOG_LEVEL`` (name or number), default WARNING."""
    raw = os.environ.get("GUFIC_LOG_LEVEL", "WARNING").strip()
    level = int(raw) if raw.isdigit() else logging.getLevelName(raw.upper())
    bad = not isinstance(level, int)
    logging.basicConfig(level=logging.WARNING if bad else level,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if bad:
        log.warning("ignoring unknown GUFIC_LOG_LEVEL %r", raw)


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "controller", None):
        cfg = cfg.with_controller(args.controller)
    if getattr(args, "duration", None) is not None:
        cfg = cfg.with_duration(args.duration)
    return cfg


def _outdir(args, cfg):
    return Path(args.out if getattr(args, "out", None) else cfg.output)


def _write_run(log_, outdir):
    """Log, plots, audit report and margin trace for one run; returns the audit report."""
    outdir.mkdir(parents=True, exist_ok=True)
    log_.write_csv(outdir / "log.csv")
    render_plots(log_, outdir / "plots")
    report = passivity_audit(log_)
    write_report([report], outdir / "audit.txt")
    write_margin_csv(report, log_.column("t"), outdir / "margins.csv")
    log.info("wrote %s", outdir)
    return report


def cmd_run(args):
    cfg = _load(args)
    log_ = simulate(cfg)
    outdir = _outdir(args, cfg)
    report = _write_run(log_, outdir)
    print(f"{cfg.name} ({cfg.controller.kind}): {len(log_)} steps -> {outdir}")
    print(report.text())
    # Only the tank-guarded law claims passivity; for the baselines the audit is informational.
    if cfg.controller.kind == "gufic" and not report.passed:
        return EXIT_AUDIT
    return EXIT_OK


def _simulate_kind(path, kind, duration):
    cfg = load_config(path).with_controller(kind)
    if duration is not None:
        cfg = cfg.with_duration(duration)
    return simulate(cfg)


def _force_error(log_, window=5.0):
    t = log_.column("t")
    if len(t) == 0:
        return float("nan")
    m = t >= t[-1] - window
    return float(np.mean(np.abs(-log_.column("Febar2")[m] - log_.column("Fd2")[m])))


def cmd_compare(args):
    cfg = _load(args)
    outdir = _outdir(args, cfg)
    kinds = ("gufic", "gic")
    with ProcessPoolExecutor(max_workers=len(kinds)) as pool:
        futures = {k: pool.submit(_simulate_kind, args.config, k, args.duration) for k in kinds}
        logs = {k: f.result() for k, f in futures.items()}
    reports = {}
    for kind, log_ in logs.items():
        reports[kind] = _write_run(log_, outdir / kind)
    render_compare(logs, outdir / "plots")
    for kind, log_ in logs.items():
        print(f"{kind}: mean |Fz - Fd| over the final 5 s = {_force_error(log_):.4g} N, "
              f"audit {'PASS' if reports[kind].passed else 'FAIL'}")
    return EXIT_AUDIT if not reports["gufic"].passed else EXIT_OK


def cmd_audit(args):
    log_ = SimLog.read_csv(args.log)
    report = passivity_audit(log_, tol=args.tol, wrench=args.wrench)
    print(report.text())
    return EXIT_OK if report.passed else EXIT_AUDIT


def cmd_validate(args):
    cfg = load_config(args.config)
    print(f"{args.config}: ok ({cfg.name}, {cfg.controller.kind}, {cfg.steps} steps)")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="gufic", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario and write log, plots and audit")
    r.add_argument("--config", required=True, help="scenario JSON file")
    r.add_argument("--controller", choices=("gufic", "gic", "naive"),
                   help="override the scenario's controller")
    r.add_argument("--duration", type=float, help="override the scenario duration in s")
    r.add_argument("--out", help="output directory (default: the config's \"output\" field)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="run gufic and gic on one scenario and overlay them")
    c.add_argument("--config", required=True, help="scenario JSON file")
    c.add_argument("--duration", type=float, help="override the scenario duration in s")
    c.add_argument("--out", help="output directory (default: the config's \"output\" field)")
    c.set_defaults(func=cmd_compare)

    a = sub.add_parser("audit", help="check the passivity inequality on a CSV log")
    a.add_argument("--log", required=True, help="CSV log written by run")
    a.add_argument("--tol", type=float, help="slack in J (default 1e-3*max(1, |S_tot(0)|))")
    a.add_argument("--wrench", choices=("Fe", "Febar"), default="Fe",
                   help="port wrench column: true contact (Fe) or filtered sensor (Febar)")
    a.set_defaults(func=cmd_audit)

    v = sub.add_parser("validate", help="schema-check a scenario config")
    v.add_argument("--config", required=True, help="scenario JSON file")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, LogFormatError, MissingChannel) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GuficError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM


if __name__ == "__main__":
    sys.exit(main())
