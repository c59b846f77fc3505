"""End-to-end experiments: library building, regime switching, noise studies.

All randomness flows from the configured base seed. Monte-Carlo trial ``i``
draws its noise for measurement time ``k`` from
``default_rng([seed + i, k])``, so runs are reproducible and trials are
independent of one another and of the trial count.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .classify import classify, project_onto_block
from .config import ExperimentConfig
from .errors import AllZero, NonFiniteField
from .library import ModalLibrary, block_of_column, build_library, save_library, write_manifest
from .pde import FieldState, ScheduleRun, initial_condition, simulate, simulate_schedule
from .pod import SnapshotMatrix, pod_basis
from .rom import build_galerkin, integrate_rom
from .sensing import Measurement, complex_noise, measure, place_sensors
from .sparse import solve

__all__ = [
    "SwitchingRow",
    "SwitchingReport",
    "TrialStats",
    "regime_snapshots",
    "build_all",
    "library_manifest",
    "simulate_reference",
    "run_switching_experiment",
    "run_monte_carlo",
    "emit_report",
    "emit_coefficients",
    "write_measurements",
    "read_measurements",
    "ACCURACY_COLUMNS",
    "SWITCHING_COLUMNS",
    "MEASUREMENT_COLUMNS",
]

ACCURACY_COLUMNS = ("true_regime", "predicted_regime", "time_label", "count", "percent")
SWITCHING_COLUMNS = ("segment", "true_regime", "predicted_regime", "margin", "recon_rel_l2")
MEASUREMENT_COLUMNS = ("sensor_x", "real", "imag", "time")
UNDECIDED = 0  # predicted label when every coefficient is zero


@dataclass
class SwitchingRow:
    segment: int
    true_regime: int
    predicted_regime: int
    margin: float
    recon_rel_l2: float


@dataclass
class SwitchingReport:
    rows: list[SwitchingRow]
    coefficients: list[np.ndarray]
    measurements: list[Measurement]
    block_scores: list[np.ndarray] = field(default_factory=list)


@dataclass
class TrialStats:
    """Predicted-regime histograms per measurement time.

    ``counts[k]`` maps predicted regime to the number of trials at
    measurement time ``times[k]``, whose true regime is ``true_regimes[k]``.
    """

    times: list[float]
    true_regimes: list[int]
    counts: list[dict[int, int]]
    trials: int
    diagnostics: dict = field(default_factory=dict)

    def accuracy(self, k: int) -> float:
        return 100.0 * self.counts[k].get(self.true_regimes[k], 0) / self.trials

    @property
    def accuracies(self) -> list[float]:
        return [self.accuracy(k) for k in range(len(self.times))]


def _ic(config: ExperimentConfig):
    return initial_condition(config.grid, config.ic_amplitude, config.ic_width,
                             config.ic_asymmetry)


def _snapshot_times(config: ExperimentConfig) -> np.ndarray:
    count = int(round((config.snapshot_stop - config.snapshot_start) / config.snapshot_stride))
    return config.snapshot_start + config.snapshot_stride * np.arange(count + 1)


def regime_snapshots(config: ExperimentConfig, regime_id: int) -> SnapshotMatrix:
    """Snapshots of one regime from the standard initial condition."""
    params = config.regime_map[regime_id]
    snaps, _ = simulate(params, _ic(config), config.snapshot_stop, config.dt,
                        _snapshot_times(config), regime_id)
    return snaps


def library_manifest(config: ExperimentConfig, lib: ModalLibrary) -> dict[str, object]:
    entries: dict[str, object] = {
        "format_version": 1,
        "n": config.n,
        "x_min": repr(config.x_min),
        "x_max": repr(config.x_max),
        "dt": repr(config.dt),
        "energy": repr(config.energy),
        "snapshot_window": f"{config.snapshot_start!r} {config.snapshot_stop!r} "
                           f"{config.snapshot_stride!r}",
        "initial_condition": f"amplitude={config.ic_amplitude!r} width={config.ic_width!r} "
                             f"asymmetry={config.ic_asymmetry!r}",
        "regimes": " ".join(str(r) for r in lib.regime_ids),
        "ranks": " ".join(str(r) for r in lib.ranks),
        "p": lib.p,
    }
    for rid, p in config.regimes:
        entries[f"regime.{rid}"] = " ".join(f"{k}={v!r}" for k, v in zip(
            ("tau", "kappa", "mu", "nu", "eps", "gamma"), p.as_tuple()))
    return entries


def build_all(config: ExperimentConfig, out=None) -> ModalLibrary:
    """Simulate every configured regime, POD each one and assemble the library.

    When ``out`` is given the library is written there together with its
    manifest.
    """
    bases = [pod_basis(regime_snapshots(config, rid), config.energy)
             for rid, _ in config.regimes]
    lib = build_library(bases)
    if out is not None:
        save_library(lib, out)
        write_manifest(out, library_manifest(config, lib))
    return lib


def simulate_reference(config: ExperimentConfig) -> ScheduleRun:
    """Full simulation through the switching schedule, sampled every time unit."""
    return simulate_schedule(config.schedule, _ic(config), config.t_end, config.dt, 1.0)


def _segment_of(config: ExperimentConfig, t: float) -> int:
    return config.schedule.segment_index(t)


def solver_kwargs(solver: str, m: int, p: int) -> dict:
    return {"k_max": min(m, p)} if solver == "omp" else {}


def run_switching_experiment(config: ExperimentConfig, lib: ModalLibrary,
                             solver: str | None = None,
                             reference: ScheduleRun | None = None) -> SwitchingReport:
    """Classify at each measurement time, then reconstruct the rest of the segment.

    For each measurement: sparse solve on the full library, block decision,
    pseudo-inverse projection onto the chosen block and a Galerkin run to
    the end of the segment. ``recon_rel_l2`` is the mean relative L2 error
    against the full simulation over the segment's final ``rom_window``
    time units (NaN if the ROM diverges or nothing was classified).
    """
    solver = solver or config.solver
    reference = reference or simulate_reference(config)
    sensors = place_sensors(config.grid, config.sensors)
    G = sensors.sample(lib.matrix)
    rows, coeffs, meas, scores = [], [], [], []
    for k, t in enumerate(config.measurement_times):
        seg = _segment_of(config, t)
        true = config.segment_regimes[seg]
        field_t = _field_state(config, reference, t)
        y = measure(field_t, sensors, config.sigma, [config.seed, k])
        sol = solve(G, y.values, solver, **solver_kwargs(solver, sensors.m, lib.p))
        coeffs.append(sol.coeffs)
        meas.append(y)
        try:
            c = classify(lib, sol, config.rule)
        except AllZero:
            rows.append(SwitchingRow(seg, true, UNDECIDED, 0.0, float("nan")))
            scores.append(np.zeros(len(lib.blocks)))
            continue
        scores.append(c.block_scores)
        err = _rom_error(config, lib, sensors, y, c.regime_id, t, config.segment_end(seg),
                         reference)
        rows.append(SwitchingRow(seg, true, c.regime_id, c.margin, err))
    return SwitchingReport(rows, coeffs, meas, scores)


def _field_state(config, reference: ScheduleRun, t: float) -> FieldState:
    return FieldState(config.grid, reference.field_at(t), t)


def _rom_error(config, lib, sensors, y, regime_id, t0, t1, reference) -> float:
    proj = project_onto_block(lib, sensors, y, regime_id)
    model = build_galerkin(lib, regime_id, config.regime_map[regime_id], config.grid)
    try:
        traj = integrate_rom(model, proj.amplitudes, (t0, t1), config.dt, 1.0)
    except NonFiniteField:
        return float("nan")
    start = max(t0, t1 - config.rom_window)
    errs = []
    for t, a in zip(traj.times, traj.amplitudes):
        if t > start + 1e-9:
            truth = reference.field_at(round(t, 9))
            errs.append(np.linalg.norm(model.modes @ a - truth) / np.linalg.norm(truth))
    return float(np.mean(errs)) if errs else float("nan")


def run_monte_carlo(config: ExperimentConfig, lib: ModalLibrary, solver: str | None = None,
                    sigma: float | None = None, trials: int | None = None,
                    seed: int | None = None, sensors: Sequence[float] | None = None,
                    reference: ScheduleRun | None = None) -> TrialStats:
    """Repeat the measurement and classification step under fresh noise.

    With ``aggregate_window = w > 0`` each decision is a majority vote over
    samples at ``t, t+1, ..., t+w-1`` (ties go to the lowest regime id).
    Solutions that hit the iteration cap are still classified and counted
    in ``diagnostics["not_converged"]``.
    """
    solver = solver or config.solver
    sigma = config.sigma if sigma is None else float(sigma)
    trials = config.trials if trials is None else int(trials)
    seed = config.seed if seed is None else int(seed)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    reference = reference or simulate_reference(config)
    sset = place_sensors(config.grid, config.sensors if sensors is None else sensors)
    G = sset.sample(lib.matrix)
    window = max(1, config.aggregate_window)
    diag = Counter()
    times, trues, counts = [], [], []
    for k, t in enumerate(config.measurement_times):
        votes = np.zeros((window, trials), dtype=int)
        for w in range(window):
            clean = sset.sample(reference.field_at(t + w))
            Y = np.empty((sset.m, trials), dtype=complex)
            for i in range(trials):
                key = [seed + i, k] if w == 0 else [seed + i, k, w]
                Y[:, i] = clean + complex_noise(sset.m, sigma, np.random.default_rng(key))
            sols = solve(G, Y, solver, **solver_kwargs(solver, sset.m, lib.p))
            for i, sol in enumerate(sols):
                diag["solves"] += 1
                diag["iterations"] += sol.iterations
                if not sol.converged:
                    diag["not_converged"] += 1
                try:
                    votes[w, i] = classify(lib, sol, config.rule).regime_id
                except AllZero:
                    diag["all_zero"] += 1
                    votes[w, i] = UNDECIDED
        hist: Counter = Counter()
        for i in range(trials):
            tally = Counter(votes[:, i].tolist())
            top = max(tally.values())
            hist[min(r for r, c in tally.items() if c == top)] += 1
        times.append(float(t))
        trues.append(config.segment_regimes[_segment_of(config, t)])
        counts.append(dict(sorted(hist.items())))
    diagnostics = {"solver": solver, "sigma": sigma, "seed": seed,
                   "solves": diag["solves"], "not_converged": diag["not_converged"],
                   "all_zero": diag["all_zero"],
                   "mean_iterations": diag["iterations"] / max(diag["solves"], 1)}
    return TrialStats(times, trues, counts, trials, diagnostics)


def _time_label(t: float) -> str:
    return f"t={t:g}"


def _accuracy_rows(stats: TrialStats, regime_ids: Sequence[int] | None):
    for k, t in enumerate(stats.times):
        preds = list(regime_ids) if regime_ids is not None else []
        preds += [r for r in stats.counts[k] if r not in preds]
        for r in sorted(preds):
            c = stats.counts[k].get(r, 0)
            yield (stats.true_regimes[k], r, _time_label(t), c,
                   f"{100.0 * c / stats.trials:.2f}")


def _switching_rows(report: SwitchingReport):
    for row in report.rows:
        yield (row.segment, row.true_regime, row.predicted_regime,
               f"{row.margin:.10g}", f"{row.recon_rel_l2:.10g}")


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue())


def emit_report(result, path, regime_ids: Sequence[int] | None = None) -> None:
    """Write a TrialStats as an accuracy table or a SwitchingReport as a switching table.

    Accuracy tables list every regime in ``regime_ids`` (when given) as a
    predicted label for each measurement time, zero counts included.
    ``None`` writes a header-only accuracy table.
    """
    if result is None:
        _write_csv(path, ACCURACY_COLUMNS, [])
    elif isinstance(result, TrialStats):
        _write_csv(path, ACCURACY_COLUMNS, _accuracy_rows(result, regime_ids))
    elif isinstance(result, SwitchingReport):
        _write_csv(path, SWITCHING_COLUMNS, _switching_rows(result))
    else:
        raise TypeError(f"cannot emit {type(result).__name__}")


def emit_coefficients(report: SwitchingReport, lib: ModalLibrary, path) -> None:
    """Per-column sparse coefficients for each measurement (the grouped-bar data)."""
    rows = []
    for seg, a in enumerate(report.coefficients):
        for col, v in enumerate(a):
            rows.append((seg, col, block_of_column(lib, col), f"{v.real:.10g}", f"{v.imag:.10g}", f"{abs(v):.10g}"))
    _write_csv(path, ("measurement", "column", "regime", "real", "imag", "abs"), rows)


def write_measurements(measurements: Sequence[Measurement], path) -> None:
    rows = []
    for m in measurements:
        for x, v in zip(m.positions, m.values):
            rows.append((repr(float(x)), repr(float(v.real)), repr(float(v.imag)),
                         repr(float(m.time))))
    _write_csv(path, MEASUREMENT_COLUMNS, rows)


def read_measurements(path) -> list[Measurement]:
    """Group rows of a measurement CSV by time, preserving first-seen order."""
    groups: dict[float, tuple[list[float], list[complex]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != MEASUREMENT_COLUMNS:
            raise ValueError(f"expected columns {','.join(MEASUREMENT_COLUMNS)}")
        for row in reader:
            t = float(row["time"])
            xs, vs = groups.setdefault(t, ([], []))
            xs.append(float(row["sensor_x"]))
            vs.append(complex(float(row["real"]), float(row["imag"])))
    return [Measurement(np.array(vs), t, 0.0, tuple(xs)) for t, (xs, vs) in groups.items()]
