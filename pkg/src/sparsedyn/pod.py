"""Proper orthogonal decomposition by the method of snapshots."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, EigenFailure

__all__ = [
    "SnapshotMatrix",
    "PodBasis",
    "method_of_snapshots",
    "truncation_rank",
    "pod_basis",
    "DEFAULT_ENERGY",
]

DEFAULT_ENERGY = 0.99
_EIG_CLAMP = 1e-12


@dataclass
class SnapshotMatrix:
    """Field snapshots stored column-wise, ``data[:, j] = U(x, times[j])``."""

    data: np.ndarray
    times: np.ndarray
    regime_id: int = 0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim == 1:
            self.data = self.data[:, None]
        self.times = np.asarray(self.times, dtype=float).reshape(-1)
        if self.data.ndim != 2 or self.data.shape[1] != self.times.size:
            raise ValueError("snapshot data must be n x q with q matching times")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("snapshot data contains non-finite entries")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def q(self) -> int:
        return self.data.shape[1]

    def window(self, t_start: float, t_stop: float) -> "SnapshotMatrix":
        keep = (self.times >= t_start - 1e-9) & (self.times <= t_stop + 1e-9)
        return SnapshotMatrix(self.data[:, keep], self.times[keep], self.regime_id)


@dataclass
class PodBasis:
    modes: np.ndarray
    singular_values: np.ndarray
    energy_fractions: np.ndarray
    regime_id: int = 0

    @property
    def rank(self) -> int:
        return self.modes.shape[1]

    @property
    def n(self) -> int:
        return self.modes.shape[0]

    def project(self, values: np.ndarray) -> np.ndarray:
        return self.modes.conj().T @ values

    def __eq__(self, other):
        if not isinstance(other, PodBasis):
            return NotImplemented
        return (self.regime_id == other.regime_id
                and np.array_equal(self.modes, other.modes)
                and np.array_equal(self.singular_values, other.singular_values)
                and np.array_equal(self.energy_fractions, other.energy_fractions))


def _as_matrix(A) -> np.ndarray:
    return A.data if isinstance(A, SnapshotMatrix) else np.asarray(A, dtype=complex)


def method_of_snapshots(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose the q x q correlation matrix ``A^H A``.

    Parameters
    ----------
    A : SnapshotMatrix or (n, q) array

    Returns
    -------
    W : (q, q) complex array
        Eigenvectors, columns ordered by decreasing eigenvalue.
    sigma : (q,) array
        Square roots of the eigenvalues, descending. Eigenvalues below
        ``1e-12 * max`` are clamped to zero.
    """
    a = _as_matrix(A)
    if a.ndim != 2 or a.shape[1] < 1:
        raise ValueError("need at least one snapshot")
    corr = a.conj().T @ a
    corr = 0.5 * (corr + corr.conj().T)
    try:
        evals, evecs = np.linalg.eigh(corr)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    evecs = evecs[:, order]
    top = evals[0] if evals.size else 0.0
    evals = np.where(evals > _EIG_CLAMP * top, evals, 0.0) if top > 0 else np.zeros_like(evals)
    return evecs, np.sqrt(evals)


def truncation_rank(sigma, energy_threshold: float = DEFAULT_ENERGY) -> int:
    """Smallest r whose leading ``r`` singular values hold ``energy_threshold`` of the energy."""
    if not 0 < energy_threshold <= 1:
        raise ValueError("energy_threshold must lie in (0, 1]")
    s2 = np.square(np.asarray(sigma, dtype=float))
    total = s2.sum()
    if not total > 0:
        raise DegenerateData("all singular values are zero")
    cum = np.cumsum(s2) / total
    # tolerance so that an exact hit (e.g. 9/10 vs 0.9) counts as reached
    r = int(np.searchsorted(cum, energy_threshold * (1 - 1e-12)) + 1)
    return min(r, int(np.count_nonzero(s2)))


def pod_basis(A, energy_threshold: float = DEFAULT_ENERGY) -> PodBasis:
    """Truncated POD basis ``Psi = A W Sigma^-1`` keeping ``energy_threshold`` energy.

    Each mode is rotated so that its largest-magnitude entry is real and
    positive.
    """
    regime_id = A.regime_id if isinstance(A, SnapshotMatrix) else 0
    a = _as_matrix(A)
    W, sigma = method_of_snapshots(a)
    r = truncation_rank(sigma, energy_threshold)
    Wr = W[:, :r]
    modes = (a @ Wr) / sigma[:r]
    peak = modes[np.argmax(np.abs(modes), axis=0), np.arange(r)]
    modes = modes * (np.abs(peak) / peak)
    energy = np.square(sigma)
    return PodBasis(modes=modes,
                    singular_values=sigma[:r].copy(),
                    energy_fractions=energy[:r] / energy.sum(),
                    regime_id=regime_id)
