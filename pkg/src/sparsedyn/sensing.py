"""Point sensors, noisy measurements and the compressed dictionary ``G = Phi Psi``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, DuplicateSensor, OutOfDomain
from .library import ModalLibrary
from .pde import FieldState, GridSpec

__all__ = [
    "SensorSet",
    "Measurement",
    "SENSORS_3",
    "SENSORS_5",
    "place_sensors",
    "complex_noise",
    "measure",
    "compressed_dictionary",
]

SENSORS_3 = (0.0, 0.7, 1.4)
SENSORS_5 = (0.0, 0.7, 1.4, 1.8, 2.2)


@dataclass(frozen=True)
class SensorSet:
    positions: tuple[float, ...]
    indices: tuple[int, ...]
    n: int

    @property
    def m(self) -> int:
        return len(self.indices)

    def sample(self, values: np.ndarray) -> np.ndarray:
        """Apply the row-selection operator to a field (or to the rows of a matrix)."""
        return np.asarray(values)[list(self.indices)]


@dataclass
class Measurement:
    values: np.ndarray
    time: float
    sigma: float
    positions: tuple[float, ...] = ()


def place_sensors(grid: GridSpec, positions: Sequence[float]) -> SensorSet:
    """Map each requested coordinate to its nearest grid node."""
    pos = [float(p) for p in positions]
    if not pos:
        raise ValueError("need at least one sensor")
    idx = []
    for p in pos:
        if not grid.x_min <= p < grid.x_max:
            raise OutOfDomain(f"sensor at x={p} outside [{grid.x_min}, {grid.x_max})")
        idx.append(int(round((p - grid.x_min) / grid.dx)) % grid.n)
    if len(set(idx)) != len(idx):
        raise DuplicateSensor(f"sensors {pos} collide on grid nodes {idx}")
    order = np.argsort(idx, kind="stable")
    return SensorSet(tuple(pos[i] for i in order), tuple(idx[i] for i in order), grid.n)


def complex_noise(m: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian noise with ``E|eta|^2 = sigma^2``."""
    scale = sigma * np.sqrt(0.5)
    re = rng.standard_normal(m)
    im = rng.standard_normal(m)
    return scale * (re + 1j * im)


def measure(field: FieldState, sensors: SensorSet, sigma: float = 0.0,
            rng_seed=0) -> Measurement:
    """Sample the field at the sensor nodes and add seeded complex noise.

    ``rng_seed`` is anything accepted by :func:`numpy.random.default_rng`,
    e.g. an int or a sequence of ints.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if field.grid.n != sensors.n:
        raise DimensionMismatch("sensors were placed on a different grid")
    y = sensors.sample(field.values).astype(complex)
    if sigma > 0:
        y = y + complex_noise(sensors.m, sigma, np.random.default_rng(rng_seed))
    return Measurement(y, field.time, float(sigma), sensors.positions)


def compressed_dictionary(lib: ModalLibrary, sensors: SensorSet) -> np.ndarray:
    if lib.n != sensors.n:
        raise DimensionMismatch(f"library n={lib.n} but sensors index a grid of n={sensors.n}")
    return sensors.sample(lib.matrix).copy()
