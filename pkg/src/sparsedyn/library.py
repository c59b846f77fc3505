"""Overcomplete modal library built from per-regime POD bases.

Binary layout (little-endian)::

    b"PODL"  u16 version  u32 block_count  u64 n
    per block:
        u32 regime_id  u32 rank
        rank x f64 singular values
        rank x f64 energy fractions
        n*rank x (f64 real, f64 imag), column-major
"""

from __future__ import annotations

import bisect
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, DuplicateRegime, FormatError, OutOfRange
from .pod import PodBasis

__all__ = [
    "ModalLibrary",
    "build_library",
    "block_of_column",
    "save_library",
    "load_library",
    "manifest_path",
    "write_manifest",
    "read_manifest",
]

MAGIC = b"PODL"
VERSION = 1
_HEADER = struct.Struct("<4sHIQ")
_BLOCK = struct.Struct("<II")


@dataclass(eq=False)
class ModalLibrary:
    blocks: list[PodBasis]
    offsets: list[int] = field(init=False)

    def __post_init__(self):
        self.blocks = list(self.blocks)
        self.offsets = []
        col = 0
        for b in self.blocks:
            self.offsets.append(col)
            col += b.rank
        self._matrix = None

    @property
    def n(self) -> int:
        return self.blocks[0].n

    @property
    def p(self) -> int:
        return self.offsets[-1] + self.blocks[-1].rank

    @property
    def regime_ids(self) -> list[int]:
        return [b.regime_id for b in self.blocks]

    @property
    def ranks(self) -> list[int]:
        return [b.rank for b in self.blocks]

    @property
    def matrix(self) -> np.ndarray:
        """The n x p concatenation ``[Psi_1 ... Psi_J]`` (cached, read-only)."""
        if self._matrix is None:
            m = np.hstack([b.modes for b in self.blocks])
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    def block(self, regime_id: int) -> PodBasis:
        for b in self.blocks:
            if b.regime_id == regime_id:
                return b
        raise KeyError(f"regime {regime_id} not in library")

    def block_index(self, regime_id: int) -> int:
        return self.regime_ids.index(regime_id)

    def columns(self, regime_id: int) -> slice:
        i = self.block_index(regime_id)
        return slice(self.offsets[i], self.offsets[i] + self.blocks[i].rank)

    def __eq__(self, other):
        if not isinstance(other, ModalLibrary):
            return NotImplemented
        return len(self.blocks) == len(other.blocks) and all(
            a == b for a, b in zip(self.blocks, other.blocks))


def build_library(bases: Sequence[PodBasis]) -> ModalLibrary:
    bases = list(bases)
    if not bases:
        raise ValueError("need at least one basis")
    n = bases[0].n
    seen = set()
    for b in bases:
        if b.n != n:
            raise DimensionMismatch(f"basis for regime {b.regime_id} has n={b.n}, expected {n}")
        if b.regime_id in seen:
            raise DuplicateRegime(f"regime {b.regime_id} appears twice")
        seen.add(b.regime_id)
    return ModalLibrary(bases)


def block_of_column(lib: ModalLibrary, col: int) -> int:
    if not 0 <= col < lib.p:
        raise OutOfRange(f"column {col} outside [0, {lib.p})")
    return lib.blocks[bisect.bisect_right(lib.offsets, col) - 1].regime_id


def save_library(lib: ModalLibrary, path) -> None:
    parts = [_HEADER.pack(MAGIC, VERSION, len(lib.blocks), lib.n)]
    for b in lib.blocks:
        parts.append(_BLOCK.pack(b.regime_id, b.rank))
        parts.append(np.asarray(b.singular_values, dtype="<f8").tobytes())
        parts.append(np.asarray(b.energy_fractions, dtype="<f8").tobytes())
        parts.append(np.asarray(b.modes, dtype="<c16").tobytes(order="F"))
    Path(path).write_bytes(b"".join(parts))


def load_library(path) -> ModalLibrary:
    buf = Path(path).read_bytes()
    if len(buf) < _HEADER.size:
        raise FormatError("file too short for header")
    magic, version, count, n = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if count == 0 or n == 0:
        raise FormatError("library declares no blocks or zero state dimension")
    pos = _HEADER.size
    blocks = []
    for _ in range(count):
        if pos + _BLOCK.size > len(buf):
            raise FormatError("truncated block header")
        rid, rank = _BLOCK.unpack_from(buf, pos)
        pos += _BLOCK.size
        need = 16 * rank + 16 * n * rank
        if rank == 0 or pos + need > len(buf):
            raise FormatError(f"block {rid}: declared rank {rank} exceeds payload")
        sv = np.frombuffer(buf, "<f8", rank, pos).astype(float)
        pos += 8 * rank
        ef = np.frombuffer(buf, "<f8", rank, pos).astype(float)
        pos += 8 * rank
        modes = np.frombuffer(buf, "<c16", n * rank, pos).reshape((n, rank), order="F")
        pos += 16 * n * rank
        blocks.append(PodBasis(np.ascontiguousarray(modes, dtype=complex), sv, ef, int(rid)))
    if pos != len(buf):
        raise FormatError(f"{len(buf) - pos} trailing bytes after declared payload")
    try:
        return build_library(blocks)
    except (DimensionMismatch, DuplicateRegime) as exc:
        raise FormatError(str(exc)) from exc


def manifest_path(lib_path) -> Path:
    p = Path(lib_path)
    return p.with_name(p.name + ".manifest")


def write_manifest(lib_path, entries: Mapping[str, object]) -> Path:
    """Write the ``key = value`` sidecar describing how a library was built."""
    out = manifest_path(lib_path)
    lines = [f"{k} = {v}" for k, v in entries.items()]
    out.write_text("\n".join(lines) + "\n")
    return out


def read_manifest(lib_path) -> dict[str, str]:
    out = {}
    for line in manifest_path(lib_path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"malformed manifest line: {line!r}")
        out[key.strip()] = value.strip()
    return out

