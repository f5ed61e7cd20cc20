"""Single-qubit feature embedding and cycle-length ("quantum walk") features.

Each real feature value x is mapped to a qubit by a Hadamard gate followed
by a phase rotation of angle 2x, repeated ``reps`` times. A feature row is
embedded column by column, the qubits are turned into 2x2 density matrices,
and the row is summarized by the total trace distance around the cycle of
consecutive columns (including the wrap-around edge). That scalar is the
only input the downstream classifier sees.

Row batches are processed by a compiled kernel when the optional extension
built from ``_walkcore.pyx`` is importable, otherwise by a numpy fallback
with identical semantics. Set QWALKTREE_PURE=1 to force the fallback.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from qwalktree.errors import InvalidInputError

from . import _pure

if os.environ.get("QWALKTREE_PURE", "") not in ("", "0"):
    _kernel = _pure
    BACKEND = "python"
else:
    try:
        from . import _walkcore as _kernel  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _kernel = _pure
        BACKEND = "python"

__all__ = [
    "BACKEND",
    "QubitState",
    "DensityMatrix",
    "QuantumWalkFeature",
    "encode",
    "density_matrix",
    "trace_distance",
    "quantum_walk_length",
    "transform_dataset",
    "walk_lengths",
]

_SQRT1_2 = math.sqrt(0.5)


@dataclass(frozen=True)
class QubitState:
    """Pure single-qubit state; |amp0|^2 + |amp1|^2 = 1 within 1e-9."""

    amp0: complex
    amp1: complex

    def norm_sq(self) -> float:
        return abs(self.amp0) ** 2 + abs(self.amp1) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    """2x2 complex density operator (Hermitian, trace 1, PSD)."""

    entries: np.ndarray


@dataclass(frozen=True)
class QuantumWalkFeature:
    """Cycle length of one embedded feature row, in trace-distance units."""

    length: float
    row_index: int


def encode(x: float, reps: int = 1) -> QubitState:
    """Embed a real value: ``reps`` repetitions of Hadamard + phase(2x) on |0>."""
    if not math.isfinite(x):
        raise InvalidInputError(f"feature value must be finite, got {x!r}")
    _check_reps(reps)
    a0, a1 = complex(1.0), complex(0.0)
    phase = cmath.exp(2j * x)
    for _ in range(reps):
        a0, a1 = (a0 + a1) * _SQRT1_2, (phase * (a0 - a1)) * _SQRT1_2
    return QubitState(a0, a1)


def density_matrix(state: QubitState) -> DensityMatrix:
    """Outer product of the state with its conjugate."""
    if abs(state.norm_sq() - 1.0) > 1e-9:
        raise InvalidInputError("state is not normalized")
    psi = np.array([state.amp0, state.amp1], dtype=np.complex128)
    return DensityMatrix(np.outer(psi, psi.conj()))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the sum of absolute singular values of ``a - b``.

    For the Hermitian 2x2 difference the singular values are the absolute
    eigenvalues, available in closed form; no general SVD is needed.
    """
    d = a.entries - b.entries
    dp = d[0, 0].real
    ds = d[1, 1].real
    q = d[0, 1]
    mid = 0.5 * (dp + ds)
    disc = math.sqrt((0.5 * (dp - ds)) ** 2 + q.real * q.real + q.imag * q.imag)
    return 0.5 * (abs(mid + disc) + abs(mid - disc))


def walk_lengths(rows: np.ndarray, reps: int = 1) -> np.ndarray:
    """Cycle length for every row of a (n_rows, n_features) float array.

    Consecutive columns contribute d(m_i, m_(i+1)) for i = 1..n-1, plus the
    wrap-around term d(m_n, m_1). For n = 2 the single edge is therefore
    counted twice; that loop shape is kept as-is.
    """
    data = _as_matrix(rows)
    _check_reps(reps)
    if data.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    return _kernel.walk_lengths(data, reps)


def quantum_walk_length(
    row: Sequence[float], reps: int = 1, row_index: int = 0
) -> QuantumWalkFeature:
    """Embed a single feature row and measure its cycle length."""
    arr = np.asarray(row, dtype=np.float64).reshape(1, -1)
    length = float(walk_lengths(arr, reps)[0])
    return QuantumWalkFeature(length, row_index)


def transform_dataset(
    rows: Sequence[Sequence[float]] | np.ndarray, reps: int = 1
) -> list[QuantumWalkFeature]:
    """Embed every row, preserving input order."""
    if not isinstance(rows, np.ndarray) and len(rows) == 0:
        return []
    lengths = walk_lengths(rows, reps)
    return [QuantumWalkFeature(float(v), i) for i, v in enumerate(lengths)]


def _check_reps(reps: int) -> None:
    if not isinstance(reps, (int, np.integer)) or reps < 1:
        raise InvalidInputError(f"reps must be a positive integer, got {reps!r}")


def _as_matrix(rows) -> np.ndarray:
    try:
        data = np.ascontiguousarray(rows, dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise InvalidInputError(f"rows must form a rectangular numeric array: {exc}") from exc
    if data.ndim != 2:
        raise InvalidInputError(f"rows must be 2-dimensional, got shape {data.shape}")
    if data.shape[1] < 2:
        raise InvalidInputError("a feature row needs at least 2 entries")
    if not np.isfinite(data).all():
        raise InvalidInputError("rows contain non-finite values")
    return data
