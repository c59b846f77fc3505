"""Pseudo-spectral integration of the cubic-quintic Ginzburg-Landau equation.

The model, written in evolution form, is::

    U_t = i[(1/2 - i tau) U_xx - i kappa U_xxxx - i gamma U
            + (1 - i mu)|U|^2 U + (nu - i eps)|U|^4 U]

on a periodic 1-D grid. The linear part is diagonal in Fourier space and is
handled exactly by exponential time differencing (ETDRK4, Cox & Matthews;
phi-function coefficients by contour averaging as in Kassam & Trefethen).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NonFiniteField
from .pod import SnapshotMatrix

__all__ = [
    "GridSpec",
    "CqgleParams",
    "FieldState",
    "BetaSchedule",
    "ScheduleRun",
    "REGIMES",
    "DEFAULT_GRID",
    "initial_condition",
    "linear_symbol",
    "nonlinear_term",
    "Etdrk4Stepper",
    "step_etdrk4",
    "simulate",
    "simulate_schedule",
]

_CONTOUR_POINTS = 64


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid ``x_j = x_min + j*dx``, ``j = 0..n-1``."""

    n: int = 1024
    x_min: float = -20.0
    x_max: float = 20.0

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def wavenumbers(self) -> np.ndarray:
        # 2*pi*m/L in standard FFT ordering
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)


DEFAULT_GRID = GridSpec()


@dataclass(frozen=True)
class CqgleParams:
    tau: float
    kappa: float
    mu: float
    nu: float
    eps: float
    gamma: float

    def __post_init__(self):
        for name in ("tau", "kappa", "mu", "nu", "eps", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.tau, self.kappa, self.mu, self.nu, self.eps, self.gamma)


# Six bifurcation regimes; keys are the regime ids used throughout.
REGIMES: dict[int, CqgleParams] = {
    1: CqgleParams(tau=-0.3, kappa=-0.05, mu=1.45, nu=0.0, eps=-0.1, gamma=-0.5),
    2: CqgleParams(tau=-0.3, kappa=-0.05, mu=1.4, nu=0.0, eps=-0.1, gamma=-0.5),
    3: CqgleParams(tau=0.08, kappa=0.0, mu=0.66, nu=-0.1, eps=-0.1, gamma=-0.1),
    4: CqgleParams(tau=0.125, kappa=0.0, mu=1.0, nu=-0.6, eps=-0.1, gamma=-0.1),
    5: CqgleParams(tau=0.08, kappa=-0.05, mu=0.6, nu=-0.1, eps=-0.1, gamma=-0.1),
    6: CqgleParams(tau=0.08, kappa=-0.05, mu=0.5, nu=-0.1, eps=-0.1, gamma=-0.1),
}


@dataclass
class FieldState:
    grid: GridSpec
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n,):
            raise ValueError(
                f"field has shape {self.values.shape}, grid expects ({self.grid.n},)")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteField(f"non-finite field values at t={self.time}")

    def copy(self) -> "FieldState":
        return FieldState(self.grid, self.values.copy(), self.time)


@dataclass(frozen=True)
class BetaSchedule:
    """Piecewise-constant parameter schedule.

    ``segments`` holds ``(t_start, regime_id, params)`` triples; segment ``i``
    is active on ``[t_start_i, t_start_{i+1})``.
    """

    segments: tuple[tuple[float, int, CqgleParams], ...]

    def __post_init__(self):
        segs = tuple((float(t), int(r), p) for t, r, p in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("schedule needs at least one segment")
        if segs[0][0] != 0.0:
            raise ValueError("first segment must start at t=0")
        starts = [s[0] for s in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start times must be strictly increasing")

    @classmethod
    def from_regimes(cls, starts: Sequence[float], regime_ids: Sequence[int],
                     regimes: dict[int, CqgleParams] = REGIMES) -> "BetaSchedule":
        return cls(tuple((t, r, regimes[r]) for t, r in zip(starts, regime_ids)))

    def segment_index(self, t: float) -> int:
        idx = 0
        for i, (t0, _, _) in enumerate(self.segments):
            if t >= t0:
                idx = i
        return idx

    def regime_at(self, t: float) -> int:
        return self.segments[self.segment_index(t)][1]


def initial_condition(grid: GridSpec, amplitude: float = 1.0, width: float = 1.0,
                      asymmetry: float = 0.0) -> FieldState:
    """Localized profile ``amplitude*sech(x/width)*(1 + asymmetry*tanh(x/width))``.

    A nonzero ``asymmetry`` breaks the x -> -x mirror symmetry, which is
    otherwise preserved exactly by the dynamics.
    """
    if not amplitude > 0 or not width > 0:
        raise ValueError("amplitude and width must be positive")
    s = grid.x / width
    values = amplitude / np.cosh(s) * (1.0 + asymmetry * np.tanh(s))
    return FieldState(grid, values.astype(complex), 0.0)


def linear_symbol(params: CqgleParams, k):
    """Fourier multiplier ``c(k)`` of the linear part of the right-hand side."""
    k2 = np.square(k)
    return -params.tau * k2 - 0.5j * k2 + params.kappa * k2 * k2 + params.gamma


def nonlinear_term(values, params: CqgleParams) -> np.ndarray:
    u = np.asarray(values, dtype=complex)
    a = u.real * u.real + u.imag * u.imag
    return 1j * (((1.0 - 1j * params.mu) + (params.nu - 1j * params.eps) * a) * a * u)


@functools.lru_cache(maxsize=64)
def _etd_coefficients(params: CqgleParams, grid: GridSpec, dt: float):
    c = linear_symbol(params, grid.wavenumbers)
    hc = dt * c
    roots = np.exp(2j * np.pi * (np.arange(_CONTOUR_POINTS) + 0.5) / _CONTOUR_POINTS)
    lr = hc[:, None] + roots[None, :]
    elr = np.exp(lr)
    lr3 = lr ** 3
    q = dt * np.mean((np.exp(lr / 2.0) - 1.0) / lr, axis=1)
    f1 = dt * np.mean((-4.0 - lr + elr * (4.0 - 3.0 * lr + lr * lr)) / lr3, axis=1)
    f2 = dt * np.mean((2.0 + lr + elr * (lr - 2.0)) / lr3, axis=1)
    f3 = dt * np.mean((-4.0 - 3.0 * lr - lr * lr + elr * (4.0 - lr)) / lr3, axis=1)
    e = np.exp(hc)
    e2 = np.exp(hc / 2.0)
    for arr in (e, e2, q, f1, f2, f3):
        arr.setflags(write=False)
    return e, e2, q, f1, f2, f3


class Etdrk4Stepper:
    """ETDRK4 stepper with precomputed coefficients for fixed params, grid and dt."""

    def __init__(self, params: CqgleParams, grid: GridSpec, dt: float,
                 dealias: bool = False):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.params = params
        self.grid = grid
        self.dt = float(dt)
        self.e, self.e2, self.q, self.f1, self.f2, self.f3 = _etd_coefficients(
            params, grid, self.dt)
        if dealias:
            m = np.abs(np.fft.fftfreq(grid.n) * grid.n)
            self._mask = (m <= grid.n / 3).astype(float)
        else:
            self._mask = None

    def _n_hat(self, v_hat):
        out = np.fft.fft(nonlinear_term(np.fft.ifft(v_hat), self.params))
        if self._mask is not None:
            out *= self._mask
        return out

    def advance_spectral(self, v):
        """One step on Fourier coefficients ``v``; returns the new coefficients."""
        e2, q = self.e2, self.q
        nv = self._n_hat(v)
        a = e2 * v + q * nv
        na = self._n_hat(a)
        b = e2 * v + q * na
        nb = self._n_hat(b)
        c = e2 * a + q * (2.0 * nb - nv)
        nc = self._n_hat(c)
        return self.e * v + self.f1 * nv + 2.0 * self.f2 * (na + nb) + self.f3 * nc

    def run_spectral(self, v, n_steps: int, t0: float = 0.0):
        for i in range(n_steps):
            v = self.advance_spectral(v)
            if not np.all(np.isfinite(v)):
                raise NonFiniteField(
                    f"field blew up at t={t0 + (i + 1) * self.dt:.6g} (dt={self.dt})")
        return v


def step_etdrk4(state: FieldState, params: CqgleParams, dt: float,
                dealias: bool = False) -> FieldState:
    stepper = Etdrk4Stepper(params, state.grid, dt, dealias)
    v = stepper.run_spectral(np.fft.fft(state.values), 1, state.time)
    return FieldState(state.grid, np.fft.ifft(v), state.time + dt)


def _steps(span: float, dt: float, what: str) -> int:
    k = int(round(span / dt))
    if abs(k * dt - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError(f"{what}={span} is not a multiple of dt={dt}")
    return k


def simulate(params: CqgleParams, ic: FieldState, t_end: float, dt: float = 0.01,
             snapshot_times: Sequence[float] = (), regime_id: int = 0,
             dealias: bool = False) -> tuple[SnapshotMatrix, FieldState]:
    """Integrate from ``ic`` to ``t_end`` and sample the field at ``snapshot_times``.

    Returns the snapshot matrix (one column per requested time) and the final
    state, which can be used to continue the run.
    """
    times = np.asarray(snapshot_times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("snapshot_times must be sorted")
    if times.size and (times[-1] > t_end + 1e-9 or times[0] < ic.time - 1e-9):
        raise ValueError("snapshot_times must lie in [ic.time, t_end]")
    stepper = Etdrk4Stepper(params, ic.grid, dt, dealias)
    marks = [_steps(t - ic.time, dt, "snapshot time") for t in times]
    total = _steps(t_end - ic.time, dt, "t_end")

    cols = np.empty((ic.grid.n, times.size), dtype=complex)
    v = np.fft.fft(ic.values)
    done = 0
    for j, target in enumerate(marks):
        v = stepper.run_spectral(v, target - done, ic.time + done * dt)
        done = target
        # no FFT round trip for a snapshot at the start time
        cols[:, j] = ic.values if target == 0 else np.fft.ifft(v)
    v = stepper.run_spectral(v, total - done, ic.time + done * dt)
    final = FieldState(ic.grid, np.fft.ifft(v), ic.time + total * dt)
    return SnapshotMatrix(cols, times, regime_id), final


@dataclass
class ScheduleRun:
    snapshots: SnapshotMatrix
    regimes: np.ndarray  # regime active at each snapshot time
    boundaries: list[tuple[float, float, int]] = field(default_factory=list)
    final: FieldState | None = None

    def field_at(self, t: float) -> np.ndarray:
        j = int(np.argmin(np.abs(self.snapshots.times - t)))
        if abs(self.snapshots.times[j] - t) > 1e-9:
            raise KeyError(f"no snapshot at t={t}")
        return self.snapshots.data[:, j]


def simulate_schedule(schedule: BetaSchedule, ic: FieldState, t_end: float,
                      dt: float = 0.01, snapshot_stride: float = 1.0,
                      dealias: bool = False) -> ScheduleRun:
    """Integrate continuously through a piecewise-constant parameter schedule.

    The state at each switch carries over unchanged into the next segment.
    Snapshots are taken every ``snapshot_stride`` from t=0 through ``t_end``;
    a snapshot exactly at a switch time is labelled with the new segment.
    """
    if t_end < schedule.segments[-1][0]:
        raise ValueError("t_end precedes the last segment start")
    stride_steps = _steps(snapshot_stride, dt, "snapshot_stride")
    total = _steps(t_end, dt, "t_end")
    starts = [_steps(s[0], dt, "segment start") for s in schedule.segments]
    bounds = []
    for i, (t0, rid, _) in enumerate(schedule.segments):
        t1 = schedule.segments[i + 1][0] if i + 1 < len(schedule.segments) else t_end
        bounds.append((t0, float(t1), rid))

    mark_steps = list(range(0, total + 1, stride_steps))
    cols = np.empty((ic.grid.n, len(mark_steps)), dtype=complex)
    labels = np.empty(len(mark_steps), dtype=int)
    v = np.fft.fft(ic.values)
    done = 0
    seg = 0
    stepper = Etdrk4Stepper(schedule.segments[0][2], ic.grid, dt, dealias)
    for j, target in enumerate(mark_steps):
        while done < target:
            nxt = starts[seg + 1] if seg + 1 < len(starts) else total + 1
            chunk = min(target, nxt) - done
            v = stepper.run_spectral(v, chunk, done * dt)
            done += chunk
            if done == nxt:
                seg += 1
                stepper = Etdrk4Stepper(schedule.segments[seg][2], ic.grid, dt, dealias)
        while seg + 1 < len(starts) and done >= starts[seg + 1]:
            seg += 1
            stepper = Etdrk4Stepper(schedule.segments[seg][2], ic.grid, dt, dealias)
        cols[:, j] = ic.values if target == 0 else np.fft.ifft(v)
        labels[j] = schedule.segments[seg][1]
    v = stepper.run_spectral(v, total - done, done * dt)
    times = np.arange(len(mark_steps)) * float(snapshot_stride)
    snaps = SnapshotMatrix(cols, times, -1)
    final = FieldState(ic.grid, np.fft.ifft(v), total * dt)
    return ScheduleRun(snaps, labels, bounds, final)
