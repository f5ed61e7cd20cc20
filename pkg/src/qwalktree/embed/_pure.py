"""Numpy fallback for the walk-length kernel.

Mirrors _walkcore.pyx operation for operation so both backends agree to
float rounding. Inputs are validated by the caller.
"""

import math

import numpy as np

_SQRT1_2 = math.sqrt(0.5)


def walk_lengths(rows: np.ndarray, reps: int) -> np.ndarray:
    n_cols = rows.shape[1]
    phase = np.exp(2j * rows)
    a0 = np.ones(rows.shape, dtype=np.complex128)
    a1 = np.zeros(rows.shape, dtype=np.complex128)
    for _ in range(reps):
        a0, a1 = (a0 + a1) * _SQRT1_2, (phase * (a0 - a1)) * _SQRT1_2

    # density-matrix entries per column: diagonal p, s and off-diagonal q
    p = a0.real * a0.real + a0.imag * a0.imag
    s = a1.real * a1.real + a1.imag * a1.imag
    q = a0 * a1.conj()

    cols = np.arange(n_cols)
    nxt = np.roll(cols, -1)  # cycle: 1, 2, ..., n-1, 0
    dp = p[:, cols] - p[:, nxt]
    ds = s[:, cols] - s[:, nxt]
    dq = q[:, cols] - q[:, nxt]
    mid = 0.5 * (dp + ds)
    disc = np.sqrt((0.5 * (dp - ds)) ** 2 + dq.real * dq.real + dq.imag * dq.imag)
    td = 0.5 * (np.abs(mid + disc) + np.abs(mid - disc))
    return td.sum(axis=1)
