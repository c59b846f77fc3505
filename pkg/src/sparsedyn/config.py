"""Experiment configuration read from INI-style ``key = value`` files.

Each regime gets its own ``[regime.<id>]`` section. ``default_config()``
carries the six standard regimes and the standard switching setup, and
``write_config`` emits a file that loads back to an equal object.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError
from .pde import REGIMES, BetaSchedule, CqgleParams, GridSpec
from .sensing import SENSORS_3, SENSORS_5

__all__ = ["ExperimentConfig", "default_config", "load_config", "write_config",
           "config_to_string", "sensor_preset"]

_PARAM_NAMES = ("tau", "kappa", "mu", "nu", "eps", "gamma")


@dataclass(frozen=True)
class ExperimentConfig:
    regimes: tuple[tuple[int, CqgleParams], ...] = tuple(REGIMES.items())
    n: int = 1024
    x_min: float = -20.0
    x_max: float = 20.0
    dt: float = 0.01
    ic_amplitude: float = 1.5
    ic_width: float = 1.0
    ic_asymmetry: float = 0.1
    snapshot_start: float = 40.0
    snapshot_stop: float = 80.0
    snapshot_stride: float = 1.0
    energy: float = 0.99
    sensors: tuple[float, ...] = SENSORS_3
    sigma: float = 0.0
    trials: int = 400
    seed: int = 0
    aggregate_window: int = 0
    segment_starts: tuple[float, ...] = (0.0, 100.0, 200.0)
    segment_regimes: tuple[int, ...] = (1, 3, 5)
    t_end: float = 300.0
    measurement_times: tuple[float, ...] = (25.0, 125.0, 225.0)
    solver: str = "l1"
    rule: str = "l1"
    rom_window: float = 50.0

    def __post_init__(self):
        self.validate()

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n, self.x_min, self.x_max)

    @property
    def regime_map(self) -> dict[int, CqgleParams]:
        return dict(self.regimes)

    @property
    def schedule(self) -> BetaSchedule:
        return BetaSchedule.from_regimes(self.segment_starts, self.segment_regimes,
                                         self.regime_map)

    def segment_end(self, i: int) -> float:
        return self.segment_starts[i + 1] if i + 1 < len(self.segment_starts) else self.t_end

    def validate(self):
        try:
            GridSpec(self.n, self.x_min, self.x_max)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        ids = [r for r, _ in self.regimes]
        if not ids:
            raise ConfigError("no regimes configured")
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate regime ids")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not 0 <= self.snapshot_start < self.snapshot_stop:
            raise ConfigError("snapshot window must satisfy 0 <= start < stop")
        if not self.snapshot_stride > 0:
            raise ConfigError("snapshot_stride must be positive")
        if not 0 < self.energy <= 1:
            raise ConfigError("energy must lie in (0, 1]")
        if not self.sensors:
            raise ConfigError("need at least one sensor")
        if self.sigma < 0:
            raise ConfigError("sigma must be non-negative")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.aggregate_window < 0:
            raise ConfigError("aggregate_window must be non-negative")
        if self.solver not in ("l1", "omp", "least_squares"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.rule not in ("l1", "l2"):
            raise ConfigError(f"unknown rule {self.rule!r}")
        if len(self.segment_starts) != len(self.segment_regimes) or not self.segment_starts:
            raise ConfigError("segment starts and regimes must pair up")
        missing = set(self.segment_regimes) - set(ids)
        if missing:
            raise ConfigError(f"schedule uses unknown regimes {sorted(missing)}")
        try:
            self.schedule
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.t_end <= self.segment_starts[-1]:
            raise ConfigError("t_end must follow the last segment start")
        for t in self.measurement_times:
            if not 0 <= t < self.t_end:
                raise ConfigError(f"measurement time {t} lies outside the schedule")
            if t + self.aggregate_window > self.t_end:
                raise ConfigError(f"aggregate window at t={t} runs past t_end")


def default_config(**overrides) -> ExperimentConfig:
    return replace(ExperimentConfig(), **overrides) if overrides else ExperimentConfig()


def sensor_preset(count: int) -> tuple[float, ...]:
    presets = {3: SENSORS_3, 5: SENSORS_5}
    if count not in presets:
        raise ConfigError(f"no sensor preset for {count} sensors (have 3 and 5)")
    return presets[count]


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _fmt(values) -> str:
    return ", ".join(repr(float(v)) if not isinstance(v, int) else str(v) for v in values)


def config_to_string(cfg: ExperimentConfig) -> str:
    lines = [
        "[grid]", f"n = {cfg.n}", f"x_min = {cfg.x_min!r}", f"x_max = {cfg.x_max!r}", "",
        "[simulation]", f"dt = {cfg.dt!r}", f"ic_amplitude = {cfg.ic_amplitude!r}",
        f"ic_width = {cfg.ic_width!r}", f"ic_asymmetry = {cfg.ic_asymmetry!r}",
        f"snapshot_start = {cfg.snapshot_start!r}", f"snapshot_stop = {cfg.snapshot_stop!r}",
        f"snapshot_stride = {cfg.snapshot_stride!r}", f"energy = {cfg.energy!r}", "",
        "[sensing]", f"sensors = {_fmt(cfg.sensors)}", f"sigma = {cfg.sigma!r}",
        f"trials = {cfg.trials}", f"seed = {cfg.seed}",
        f"aggregate_window = {cfg.aggregate_window}", "",
        "[schedule]",
        "segments = " + ", ".join(f"{t:g}:{r}" for t, r in
                                  zip(cfg.segment_starts, cfg.segment_regimes)),
        f"t_end = {cfg.t_end!r}", f"measurement_times = {_fmt(cfg.measurement_times)}",
        f"rom_window = {cfg.rom_window!r}", "",
        "[solver]", f"name = {cfg.solver}", f"rule = {cfg.rule}", "",
    ]
    for rid, p in cfg.regimes:
        lines.append(f"[regime.{rid}]")
        lines += [f"{name} = {getattr(p, name)!r}" for name in _PARAM_NAMES]
        lines.append("")
    return "\n".join(lines)


def write_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(config_to_string(cfg))


def load_config(path) -> ExperimentConfig:
    """Parse a config file; omitted keys and sections keep their defaults.

    When any ``[regime.*]`` section is present, only those regimes are used.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    base = ExperimentConfig()
    kw: dict = {}
    keys = {
        ("grid", "n"): ("n", int), ("grid", "x_min"): ("x_min", float),
        ("grid", "x_max"): ("x_max", float),
        ("simulation", "dt"): ("dt", float),
        ("simulation", "ic_amplitude"): ("ic_amplitude", float),
        ("simulation", "ic_width"): ("ic_width", float),
        ("simulation", "ic_asymmetry"): ("ic_asymmetry", float),
        ("simulation", "snapshot_start"): ("snapshot_start", float),
        ("simulation", "snapshot_stop"): ("snapshot_stop", float),
        ("simulation", "snapshot_stride"): ("snapshot_stride", float),
        ("simulation", "energy"): ("energy", float),
        ("sensing", "sensors"): ("sensors", _floats),
        ("sensing", "sigma"): ("sigma", float),
        ("sensing", "trials"): ("trials", int),
        ("sensing", "seed"): ("seed", int),
        ("sensing", "aggregate_window"): ("aggregate_window", int),
        ("schedule", "t_end"): ("t_end", float),
        ("schedule", "measurement_times"): ("measurement_times", _floats),
        ("schedule", "rom_window"): ("rom_window", float),
        ("solver", "name"): ("solver", str), ("solver", "rule"): ("rule", str),
    }
    known_sections = {s for s, _ in keys} | {"schedule"}
    try:
        for (section, key), (attr, conv) in keys.items():
            if parser.has_option(section, key):
                kw[attr] = conv(parser.get(section, key))
        if parser.has_option("schedule", "segments"):
            starts, ids = [], []
            for item in parser.get("schedule", "segments").split(","):
                t, _, r = item.strip().partition(":")
                starts.append(float(t))
                ids.append(int(r))
            kw["segment_starts"] = tuple(starts)
            kw["segment_regimes"] = tuple(ids)
        regimes = []
        for section in parser.sections():
            if section.startswith("regime."):
                rid = int(section.split(".", 1)[1])
                vals = {name: float(parser.get(section, name)) for name in _PARAM_NAMES}
                regimes.append((rid, CqgleParams(**vals)))
            elif section not in known_sections:
                raise ConfigError(f"unknown section [{section}]")
        if regimes:
            kw["regimes"] = tuple(sorted(regimes, key=lambda item: item[0]))
    except (ValueError, configparser.Error) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return replace(base, **kw)
