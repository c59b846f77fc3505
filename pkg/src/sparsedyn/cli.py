"""Command-line entry point ``sparsedyn``.

Exit codes: 0 success, 2 configuration error, 3 numerical blow-up,
4 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness
from .classify import classify as classify_solution
from .config import ExperimentConfig, config_to_string, load_config, sensor_preset
from .errors import AllZero, ConfigError, FormatError, NonFiniteField, SparseDynError
from .library import load_library, read_manifest
from .pde import GridSpec
from .sensing import place_sensors
from .sparse import solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_SOLVER_NAMES = {"l1": "l1", "omp": "omp", "ls": "least_squares"}


def _config(path) -> ExperimentConfig:
    return load_config(path) if path else ExperimentConfig()


def _cmd_simulate(args) -> int:
    cfg = _config(args.config)
    if args.regime not in cfg.regime_map:
        raise ConfigError(f"regime {args.regime} is not configured")
    snaps = harness.regime_snapshots(cfg, args.regime)
    with open(args.out, "wb") as fh:
        np.savez(fh, data=snaps.data, times=snaps.times, x=cfg.grid.x,
                 regime_id=np.int64(args.regime))
    print(f"regime {args.regime}: {snaps.q} snapshots of n={snaps.n} -> {args.out}")
    return EXIT_OK


def _cmd_build(args) -> int:
    cfg = _config(args.config)
    lib = harness.build_all(cfg, args.out)
    ranks = ", ".join(f"{r}:{k}" for r, k in zip(lib.regime_ids, lib.ranks))
    print(f"library p={lib.p} ranks {{{ranks}}} -> {args.out}")
    return EXIT_OK


def _manifest_grid(lib_path) -> GridSpec:
    try:
        m = read_manifest(lib_path)
        return GridSpec(int(m["n"]), float(m["x_min"]), float(m["x_max"]))
    except KeyError as exc:
        raise FormatError(f"manifest lacks {exc}") from exc
    except ValueError as exc:
        raise FormatError(f"bad manifest grid: {exc}") from exc


def _cmd_classify(args) -> int:
    lib = load_library(args.lib)
    grid = _manifest_grid(args.lib)
    if grid.n != lib.n:
        raise FormatError(f"manifest n={grid.n} disagrees with library n={lib.n}")
    solver = _SOLVER_NAMES[args.solver]
    try:
        measurements = harness.read_measurements(args.measurements)
    except ValueError as exc:
        raise FormatError(f"{args.measurements}: {exc}") from exc
    out = sys.stdout
    out.write("time,predicted_regime,margin\n")
    for m in measurements:
        sensors = place_sensors(grid, m.positions)
        order = [m.positions.index(x) for x in sensors.positions]
        y = m.values[order]
        G = sensors.sample(lib.matrix)
        sol = solve(G, y, solver, **harness.solver_kwargs(solver, sensors.m, lib.p))
        try:
            c = classify_solution(lib, sol, args.rule)
            out.write(f"{m.time:g},{c.regime_id},{c.margin:.10g}\n")
        except AllZero:
            out.write(f"{m.time:g},{harness.UNDECIDED},0\n")
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    cfg = _config(args.config)
    kw = {}
    if args.sensors is not None:
        kw["sensors"] = sensor_preset(args.sensors)
    if args.sigma is not None:
        kw["sigma"] = args.sigma
    if args.trials is not None:
        kw["trials"] = args.trials
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.aggregate_window is not None:
        kw["aggregate_window"] = args.aggregate_window
    if args.solver is not None:
        kw["solver"] = _SOLVER_NAMES[args.solver]
    try:
        return replace(cfg, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    lib = load_library(args.lib)
    if lib.n != cfg.n:
        raise ConfigError(f"library n={lib.n} does not match config n={cfg.n}")
    missing = set(cfg.segment_regimes) - set(lib.regime_ids)
    if missing:
        raise ConfigError(f"library lacks regimes {sorted(missing)}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.kind == "switching":
        report = harness.run_switching_experiment(cfg, lib)
        harness.emit_report(report, out_dir / "switching.csv")
        harness.emit_coefficients(report, lib, out_dir / "coefficients.csv")
        harness.write_measurements(report.measurements, out_dir / "measurements.csv")
        for row in report.rows:
            print(f"segment {row.segment}: true {row.true_regime} predicted "
                  f"{row.predicted_regime} margin {row.margin:.4g} "
                  f"recon_rel_l2 {row.recon_rel_l2:.4g}")
    else:
        stats = harness.run_monte_carlo(cfg, lib)
        harness.emit_report(stats, out_dir / "accuracy.csv", lib.regime_ids)
        (out_dir / "diagnostics.json").write_text(
            json.dumps(stats.diagnostics, sort_keys=True, indent=2) + "\n")
        for t, acc in zip(stats.times, stats.accuracies):
            print(f"t={t:g}: accuracy {acc:.2f}%")
    return EXIT_OK


def _cmd_default_config(args) -> int:
    text = config_to_string(ExperimentConfig())
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparsedyn", description=(
        "Build modal libraries from Ginzburg-Landau simulations and classify "
        "regimes from sparse point measurements."))
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate one regime and save its snapshots (.npz)")
    s.add_argument("--regime", type=int, required=True)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_simulate)

    b = sub.add_parser("build-library", help="build and save the modal library")
    b.add_argument("--config")
    b.add_argument("--out", required=True)
    b.set_defaults(func=_cmd_build)

    c = sub.add_parser("classify", help="classify measurements from a CSV file")
    c.add_argument("--lib", required=True)
    c.add_argument("--measurements", required=True)
    c.add_argument("--solver", choices=sorted(_SOLVER_NAMES), default="l1")
    c.add_argument("--rule", choices=("l1", "l2"), default="l1")
    c.set_defaults(func=_cmd_classify)

    e = sub.add_parser("experiment", help="run the switching or Monte-Carlo experiment")
    e.add_argument("kind", choices=("switching", "montecarlo"))
    e.add_argument("--config")
    e.add_argument("--lib", required=True)
    e.add_argument("--out-dir", required=True)
    e.add_argument("--sensors", type=int, choices=(3, 5))
    e.add_argument("--sigma", type=float)
    e.add_argument("--trials", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--aggregate-window", type=int)
    e.add_argument("--solver", choices=sorted(_SOLVER_NAMES))
    e.set_defaults(func=_cmd_experiment)

    d = sub.add_parser("default-config", help="print or write the default configuration")
    d.add_argument("--out")
    d.set_defaults(func=_cmd_default_config)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteField as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, FormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SparseDynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
