"""Command-line front end: ``lmsr-market <subcommand> [flags]``.

Every subcommand reads an optional JSON config, runs the matching library
call, and writes CSV tables, a ``manifest.json`` and companion plot scripts
into ``--out``. Failures exit nonzero and leave ``error.json`` behind.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import PHASE_CONVENTION
from .config import SCHEMA_VERSION, experiment_from_doc, experiment_to_doc, load_json, simulation_from_doc
from .dynamics import classify_rest_point, integrate
from .errors import ConfigError, DegenerateMeasurement, IntegrationFault
from .experiments import (
    CONVENTIONS,
    kind_counts,
    run_constant_info_suite,
    run_interval_tracking,
    run_lag_sweep,
    run_lorenz_demo,
    run_multi_asset_mc,
)
from .plots import emit_plot_script
from .validation import run_validation

log = logging.getLogger("lmsr_market")

EXIT_OK, EXIT_CONFIG, EXIT_FAULT, EXIT_DEGENERATE, EXIT_CHECK_FAILED = 0, 2, 3, 4, 1

SUBCOMMANDS = {
    "simulate": None,
    "lorenz": "lorenz_demo",
    "track": "interval_tracking",
    "lag-sweep": "lag_sweep",
    "multi-mc": "multi_asset_mc",
    "constant-suite": "constant_info_suite",
    "validate": None,
}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return "" if v is None else str(v)


def write_table(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_manifest(out: Path, subcommand: str, config_doc, seed, outputs, extra=None) -> Path:
    manifest = {
        "tool": "lmsr-market",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "seed": seed,
        "config": config_doc,
        "conventions": {**CONVENTIONS, "phase": PHASE_CONVENTION},
        "outputs": sorted(str(Path(p).name) for p in outputs),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    if extra:
        manifest.update(extra)
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _report_row(report):
    p = report.p_star.p.tolist() if report.p_star is not None else None
    return report.kind.value, p, report.t_settle, report.asset


# ---------------------------------------------------------------------------
# subcommand bodies; each returns (config echo, seed, output paths, extra manifest fields)


def cmd_simulate(doc, args, out: Path):
    if doc is None:
        raise ConfigError("simulate needs --config")
    doc = json.loads(json.dumps(doc))
    if args.seed is not None:
        doc["seed"] = args.seed
    market, agents, signal, icfg, sigma, classify = simulation_from_doc(doc)
    traj = integrate(market, agents, signal, icfg, sigma=sigma, record_signal=True)
    path = out / "trajectory.csv"
    traj.to_csv(path)
    outputs = [path, emit_plot_script(path, "trajectory")]
    extra = {}
    if classify and icfg.t_end < icfg.convergence_window:
        extra["rest_point"] = {"kind": None, "skipped": "t_end shorter than convergence_window"}
    elif classify:
        kind, p_star, t_settle, asset = _report_row(classify_rest_point(traj, agents, sigma))
        extra["rest_point"] = {"kind": kind, "p_star": p_star, "t_settle": t_settle, "asset": asset}
    return doc, doc.get("seed"), outputs, extra


def cmd_lorenz(cfg, args, out: Path):
    res = run_lorenz_demo(cfg)
    tables = []
    for i, (traj, trace) in enumerate(zip(res.trajectories, res.traces)):
        p = out / f"lorenz_trace_ic{i}.csv"
        write_table(p, ["t", "x", "y", "z"], ((t, *s) for t, s in zip(trace.times, trace.samples)))
        tables.append(p)
        p = out / f"lorenz_market_ic{i}.csv"
        traj.to_csv(p)
        tables.append(p)
    t = res.trajectories[0].times
    overlay = out / "lorenz_demo.csv"
    cols = []
    for traj in res.trajectories:
        cols += [traj.signal_samples[:, 0], traj.p]
    write_table(overlay, ["t", "x_ic0", "p_ic0", "x_ic1", "p_ic1"], (
        (t[k], *(c[k] for c in cols)) for k in range(t.size)))
    tables.append(overlay)
    return tables + [emit_plot_script(overlay, "lorenz_demo")], {}


def cmd_track(cfg, args, out: Path):
    res = run_interval_tracking(cfg)
    path = out / "interval_tracking.csv"
    res.trajectory.to_csv(path)
    runs = out / "zero_drift_runs.csv"
    write_table(runs, ["t_start", "t_end"], res.zero_drift_runs)
    intervals = out / "agents.json"
    from .agents import agents_to_json

    intervals.write_text(json.dumps(agents_to_json(res.agents), indent=1) + "\n")
    return [path, runs, intervals, emit_plot_script(path, "interval_tracking")], {}


def cmd_lag_sweep(cfg, args, out: Path):
    progress = None
    if not args.quiet:
        P = cfg.resolved()
        total = len(P["alphas"]) * len(P["nus"]) * P["reps"]
        done = [0]

        def progress(_job):
            done[0] += 1
            if done[0] % max(1, total // 20) == 0 or done[0] == total:
                print(f"lag-sweep: {done[0]}/{total} runs", file=sys.stderr, flush=True)

    res = run_lag_sweep(cfg, threads=args.threads, progress=progress)
    measured = [s for s in res.summaries if s.n_reps > 0]
    if not measured:
        raise DegenerateMeasurement("every lag-sweep run was degenerate")
    path = out / "lag_sweep.csv"
    write_table(path, ["alpha", "nu", "mean_ratio", "ci_halfwidth", "n_reps"],
                ((s.alpha, s.nu, s.mean_phase_ratio, s.ci_halfwidth, s.n_reps) for s in res.summaries))
    raw = out / "lag_sweep_runs.csv"
    write_table(raw, ["alpha", "nu", "rep", "ratio"],
                ((a, v, r, x) for (a, v), xs in res.ratios.items() for r, x in enumerate(xs)))
    return [path, raw, emit_plot_script(path, "lag_sweep")], {"n_degenerate": res.n_degenerate}


def cmd_multi_mc(cfg, args, out: Path):
    res = run_multi_asset_mc(cfg, threads=args.threads)
    M = int(cfg.resolved()["n_assets"])
    path = out / "multi_asset_mc.csv"
    header = ["instance", "kind", "t_settle", "oscillating", "max_reversals"]
    header += [f"size_{j}" for j in range(M)] + [f"p_end_{j}" for j in range(M)] + [f"p_star_{j}" for j in range(M)]
    rows = []
    for r in res:
        kind, p_star, t_settle, _ = _report_row(r.report)
        rows.append([r.index, kind, t_settle, r.oscillating, r.max_reversals, *r.class_sizes, *r.p_end,
                     *(p_star if p_star is not None else [None] * M)])
    write_table(path, header, rows)
    counts = kind_counts([r.report for r in res])
    extra = {"kind_counts": counts, "n_oscillating": sum(r.oscillating for r in res)}
    return [path, emit_plot_script(path, "multi_asset_mc")], extra


def cmd_constant_suite(cfg, args, out: Path):
    res = run_constant_info_suite(cfg, threads=args.threads)
    path = out / "constant_info_suite.csv"
    header = ["instance", "n_0", "n_1", "p0", "kind", "p_star", "t_settle", "asset",
              "monotone_violation", "chatter_bound"]
    rows = []
    for r in res:
        kind, p_star, t_settle, asset = _report_row(r.report)
        n1 = sum(a.asset_class == 1 for a in r.agents)
        rows.append([r.index, len(r.agents) - n1, n1, r.p0, kind, p_star[1] if p_star else None, t_settle, asset,
                     r.monotone_violation, r.chatter_bound])
    write_table(path, header, rows)
    return [path], {"kind_counts": kind_counts([r.report for r in res])}


EXPERIMENT_COMMANDS = {
    "lorenz": cmd_lorenz,
    "track": cmd_track,
    "lag-sweep": cmd_lag_sweep,
    "multi-mc": cmd_multi_mc,
    "constant-suite": cmd_constant_suite,
}


def cmd_validate(args, out: Path):
    results = run_validation(args.seed or 0)
    width = max(len(r.name) for r in results)
    lines = [f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results]
    if not args.quiet:
        print("\n".join(lines))
    path = out / "validation.csv"
    write_table(path, ["check", "passed", "detail"], ((r.name, r.passed, r.detail) for r in results))
    return all(r.passed for r in results), [path]


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmsr-market", description="LMSR market simulations and experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    helps = {
        "simulate": "integrate one market described by a JSON config",
        "lorenz": "binary market driven by a Lorenz signal from two nearby initial conditions",
        "track": "interval agents tracking a sinusoidal signal",
        "lag-sweep": "phase-lag ratio over input gain alpha and price sensitivity nu",
        "multi-mc": "M-asset constant-information Monte Carlo",
        "constant-suite": "binary constant-information rest-point suite",
        "validate": "run the invariant self-checks",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", type=Path, help="JSON config document")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
        p.add_argument("--seed", type=_u64, help="seed override (unsigned 64-bit)")
        p.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                       help="worker threads (default: machine parallelism)")
        p.add_argument("--quiet", action="store_true", help="suppress progress and tables on stdout/stderr")
    return parser


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _fail(out: Path | None, code: int, exc: BaseException, subcommand: str) -> int:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code, "subcommand": subcommand}
    if isinstance(exc, IntegrationFault):
        record["step"] = exc.step
    text = json.dumps(record)
    print(text, file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(text + "\n")
        except OSError:
            pass
    return code


def dispatch(args: argparse.Namespace) -> int:
    out: Path = args.out
    name = args.subcommand
    try:
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"output directory {out} is not writable: {exc}") from None
        doc = load_json(args.config) if args.config else None
        if doc is not None and not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")

        if name == "validate":
            ok, outputs = cmd_validate(args, out)
            write_manifest(out, name, doc, args.seed or 0, outputs, {"all_passed": ok})
            return EXIT_OK if ok else EXIT_CHECK_FAILED
        if name == "simulate":
            echo, seed, outputs, extra = cmd_simulate(doc, args, out)
            write_manifest(out, name, echo, seed, outputs, extra)
            return EXIT_OK

        kind = SUBCOMMANDS[name]
        if doc is not None and doc.get("kind", kind) != kind:
            raise ConfigError(f"config kind {doc.get('kind')!r} does not match subcommand {name!r} ({kind})")
        cfg = experiment_from_doc(doc, kind, args.seed)
        cfg.resolved()
        outputs, extra = EXPERIMENT_COMMANDS[name](cfg, args, out)
        write_manifest(out, name, experiment_to_doc(cfg), cfg.seed, outputs, {"threads": args.threads, **extra})
        return EXIT_OK
    except ConfigError as exc:
        return _fail(out, EXIT_CONFIG, exc, name)
    except IntegrationFault as exc:
        return _fail(out, EXIT_FAULT, exc, name)
    except DegenerateMeasurement as exc:
        return _fail(out, EXIT_DEGENERATE, exc, name)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s %(message)s")
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
