"""Galerkin reduced-order models on a single POD block.

Amplitudes evolve by ``da/dt = L_r a + Psi^H N(Psi a)`` where ``L_r`` is the
spectral linear operator projected onto the modes and ``N`` is evaluated on
the grid and projected back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteField
from .library import ModalLibrary
from .pde import CqgleParams, FieldState, GridSpec, linear_symbol, nonlinear_term

__all__ = [
    "GalerkinModel",
    "CoefficientTrajectory",
    "galerkin_from_modes",
    "build_galerkin",
    "rom_rhs",
    "rk4_step",
    "integrate_rom",
    "reconstruct_field",
]


@dataclass(frozen=True)
class GalerkinModel:
    regime_id: int
    modes: np.ndarray
    linear_matrix: np.ndarray
    params: CqgleParams
    grid: GridSpec

    @property
    def rank(self) -> int:
        return self.modes.shape[1]


@dataclass
class CoefficientTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (len(times), r)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape[0] != self.times.size:
            raise ValueError("one amplitude vector per time required")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def galerkin_from_modes(modes, params: CqgleParams, grid: GridSpec,
                        regime_id: int = 0) -> GalerkinModel:
    modes = np.array(modes, dtype=complex)
    if modes.ndim != 2 or modes.shape[1] == 0:
        raise ValueError("need at least one mode")
    if modes.shape[0] != grid.n:
        raise DimensionMismatch(f"modes have n={modes.shape[0]}, grid has n={grid.n}")
    c = linear_symbol(params, grid.wavenumbers)
    l_modes = np.fft.ifft(c[:, None] * np.fft.fft(modes, axis=0), axis=0)
    lin = modes.conj().T @ l_modes
    modes.setflags(write=False)
    lin.setflags(write=False)
    return GalerkinModel(regime_id, modes, lin, params, grid)


def build_galerkin(lib: ModalLibrary, regime_id: int, params: CqgleParams,
                   grid: GridSpec) -> GalerkinModel:
    if grid.n != lib.n:
        raise DimensionMismatch(f"library n={lib.n} but grid n={grid.n}")
    return galerkin_from_modes(lib.block(regime_id).modes, params, grid, regime_id)


def rom_rhs(model: GalerkinModel, a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    u = model.modes @ a
    return model.linear_matrix @ a + model.modes.conj().T @ nonlinear_term(u, model.params)


def rk4_step(model: GalerkinModel, a, dt: float) -> np.ndarray:
    k1 = rom_rhs(model, a)
    k2 = rom_rhs(model, a + 0.5 * dt * k1)
    k3 = rom_rhs(model, a + 0.5 * dt * k2)
    k4 = rom_rhs(model, a + dt * k3)
    return a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_rom(model: GalerkinModel, a0, t_span, dt: float = 0.01,
                  dt_out: float = 1.0) -> CoefficientTrajectory:
    """Classical RK4 from ``t_span[0]`` to ``t_span[1]``, sampled every ``dt_out``.

    ``dt_out`` must be a multiple of ``dt``; the end time is always included.
    """
    if not dt > 0 or not dt_out > 0:
        raise ValueError("dt and dt_out must be positive")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 < t0:
        raise ValueError("t_span must be increasing")
    a = np.asarray(a0, dtype=complex).copy()
    if a.shape != (model.rank,):
        raise DimensionMismatch(f"a0 has shape {a.shape}, model rank is {model.rank}")
    stride = int(round(dt_out / dt))
    if stride < 1 or abs(stride * dt - dt_out) > 1e-9 * dt_out:
        raise ValueError("dt_out must be a multiple of dt")
    total = int(round((t1 - t0) / dt))
    times = [t0]
    out = [a.copy()]
    for i in range(1, total + 1):
        a = rk4_step(model, a, dt)
        if not np.all(np.isfinite(a)):
            raise NonFiniteField(f"ROM amplitudes blew up at t={t0 + i * dt:.6g}")
        if i % stride == 0 or i == total:
            times.append(t0 + i * dt)
            out.append(a.copy())
    return CoefficientTrajectory(np.array(times), np.array(out).reshape(len(times), model.rank))


def reconstruct_field(model: GalerkinModel, a, time: float = 0.0) -> FieldState:
    return FieldState(model.grid, model.modes @ np.asarray(a, dtype=complex), time)
