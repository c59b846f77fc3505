"""Regime decisions from sparse coefficients, and per-block projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZero, DimensionMismatch
from .library import ModalLibrary
from .sensing import Measurement, SensorSet
from .sparse import SparseSolution

__all__ = ["Classification", "BlockProjection", "block_scores", "classify",
           "project_onto_block", "RULES"]

RULES = ("l1", "l2")
_PINV_RCOND = 1e-10


@dataclass
class Classification:
    regime_id: int
    block_scores: np.ndarray
    margin: float
    solution: SparseSolution


@dataclass
class BlockProjection:
    amplitudes: np.ndarray
    regime_id: int
    underdetermined: bool


def block_scores(lib: ModalLibrary, coeffs, rule: str = "l1") -> np.ndarray:
    """Per-block norm of the coefficients: sum of moduli (``l1``) or Euclidean (``l2``)."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] != lib.p:
        raise DimensionMismatch(f"expected {lib.p} coefficients, got {coeffs.shape[0]}")
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    mags = np.abs(coeffs)
    if rule == "l2":
        mags = mags * mags
    out = np.add.reduceat(mags, lib.offsets, axis=0)
    return np.sqrt(out) if rule == "l2" else out


def classify(lib: ModalLibrary, sol: SparseSolution, rule: str = "l1") -> Classification:
    """Pick the block with the largest score; ties go to the earliest block."""
    scores = block_scores(lib, sol.coeffs, rule)
    if not np.any(scores > 0):
        raise AllZero("all coefficients are zero")
    best = int(np.argmax(scores))
    rest = np.delete(scores, best)
    margin = float(scores[best] - rest.max()) if rest.size else float(scores[best])
    return Classification(lib.blocks[best].regime_id, scores, margin, sol)


def project_onto_block(lib: ModalLibrary, sensors: SensorSet, y, regime_id: int) -> BlockProjection:
    """Least-squares amplitudes of one block's modes from point measurements.

    Uses an SVD pseudo-inverse with relative cutoff 1e-10, so with fewer
    sensors than modes the minimum-norm amplitudes are returned and
    ``underdetermined`` is set.
    """
    values = y.values if isinstance(y, Measurement) else np.asarray(y, dtype=complex)
    if lib.n != sensors.n:
        raise DimensionMismatch("sensors were placed on a different grid")
    basis = lib.block(regime_id)
    G = sensors.sample(basis.modes)
    a0 = np.linalg.pinv(G, rcond=_PINV_RCOND) @ values
    return BlockProjection(a0, regime_id, sensors.m < basis.rank)
