import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qwalktree import embed
from qwalktree.embed import (
    DensityMatrix,
    QubitState,
    density_matrix,
    encode,
    quantum_walk_length,
    trace_distance,
    transform_dataset,
    walk_lengths,
)
from qwalktree.embed import _pure
from qwalktree.errors import InvalidInputError

INV_SQRT2 = 1 / math.sqrt(2)

finite_angles = st.floats(-50.0, 50.0, allow_nan=False, allow_infinity=False)


def rho(x: float, reps: int = 1) -> DensityMatrix:
    return density_matrix(encode(x, reps))


# ---------------- encode ----------------


def test_encode_zero_is_plus_state():
    s = encode(0.0, 1)
    assert s.amp0 == pytest.approx(INV_SQRT2)
    assert s.amp1 == pytest.approx(INV_SQRT2)


def test_encode_half_pi_flips_amp1_sign():
    s = encode(math.pi / 2, 1)
    assert s.amp0 == pytest.approx(INV_SQRT2)
    assert s.amp1 == pytest.approx(-INV_SQRT2)  # e^{i pi} = -1


def test_encode_is_pi_periodic():
    s = encode(math.pi, 1)
    assert s.amp0 == pytest.approx(INV_SQRT2)
    assert s.amp1 == pytest.approx(INV_SQRT2)


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
def test_encode_rejects_non_finite(bad):
    with pytest.raises(InvalidInputError):
        encode(bad)


def test_encode_rejects_bad_reps():
    with pytest.raises(InvalidInputError):
        encode(1.0, 0)


@given(finite_angles, st.integers(1, 4))
def test_encode_stays_normalized(x, reps):
    assert encode(x, reps).norm_sq() == pytest.approx(1.0, abs=1e-12)


# ---------------- density_matrix ----------------


def test_density_of_basis_state():
    rho0 = density_matrix(QubitState(1.0, 0.0))
    assert np.allclose(rho0.entries, [[1, 0], [0, 0]])


def test_density_of_plus_state_is_half_everywhere():
    assert np.allclose(rho(0.0).entries, np.full((2, 2), 0.5))


def test_density_quarter_pi_off_diagonal():
    expected = np.array([[0.5, -0.5j], [0.5j, 0.5]])
    assert np.allclose(rho(math.pi / 4).entries, expected, atol=1e-12)


def test_density_rejects_unnormalized_state():
    with pytest.raises(InvalidInputError):
        density_matrix(QubitState(1.0, 1.0))


def test_density_invariants_on_random_encodings():
    rng = np.random.default_rng(123)
    for x, reps in zip(rng.uniform(-20, 20, 500), rng.integers(1, 4, 500)):
        m = rho(x, int(reps)).entries
        assert np.allclose(m, m.conj().T, atol=1e-12)          # Hermitian
        assert abs(np.trace(m).real - 1.0) < 1e-12             # trace 1
        assert np.linalg.eigvalsh(m).min() >= -1e-12           # PSD
        assert abs(np.linalg.det(m)) < 1e-9                    # pure, rank 1


# ---------------- trace_distance ----------------


def test_trace_distance_of_identical_matrices_is_zero():
    assert trace_distance(rho(0.7), rho(0.7)) == 0.0


def test_trace_distance_of_orthogonal_states_is_one():
    rho0 = density_matrix(QubitState(1.0, 0.0))
    rho1 = density_matrix(QubitState(0.0, 1.0))
    assert trace_distance(rho0, rho1) == pytest.approx(1.0, abs=1e-12)


def test_trace_distance_spec_example_matches_eigensolver():
    d = trace_distance(rho(0.0), rho(math.pi / 6))
    assert d == pytest.approx(0.5, abs=1e-9)
    # independent oracle: eigenvalues of the 2x2 difference
    diff = rho(0.0).entries - rho(math.pi / 6).entries
    assert d == pytest.approx(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum(), abs=1e-12)


@given(finite_angles, finite_angles)
def test_trace_distance_closed_form_oracle(x, y):
    assert trace_distance(rho(x), rho(y)) == pytest.approx(
        abs(math.sin(x - y)), abs=1e-9
    )


@given(finite_angles, finite_angles, finite_angles, st.integers(1, 3))
def test_metric_axioms(x, y, z, reps):
    a, b, c = rho(x, reps), rho(y, reps), rho(z, reps)
    dab = trace_distance(a, b)
    assert dab >= 0.0
    assert dab == pytest.approx(trace_distance(b, a), abs=1e-12)
    if dab < 1e-12:
        assert np.allclose(a.entries, b.entries, atol=1e-6)
    assert dab <= trace_distance(a, c) + trace_distance(c, b) + 1e-9


# ---------------- quantum_walk_length ----------------


def test_walk_of_constant_row_is_zero():
    for n in (2, 3, 7):
        assert quantum_walk_length([1.3] * n).length == pytest.approx(0.0, abs=1e-12)


def test_walk_two_entries_counts_edge_twice():
    assert quantum_walk_length([0.0, math.pi / 2]).length == pytest.approx(2.0, abs=1e-9)


def test_walk_three_entries_closed_form():
    expected = 0.5 + 0.5 + math.sin(math.pi / 3)
    got = quantum_walk_length([0.0, math.pi / 6, math.pi / 3]).length
    assert got == pytest.approx(expected, abs=1e-9)


def test_walk_rejects_short_and_non_finite_rows():
    with pytest.raises(InvalidInputError):
        quantum_walk_length([1.0])
    with pytest.raises(InvalidInputError):
        quantum_walk_length([1.0, float("nan")])


def test_walk_matches_objectwise_composition():
    rng = np.random.default_rng(7)
    for _ in range(50):
        row = rng.uniform(-5, 5, rng.integers(2, 9))
        mats = [rho(x) for x in row]
        expected = sum(
            trace_distance(mats[i], mats[i + 1]) for i in range(len(row) - 1)
        ) + trace_distance(mats[-1], mats[0])
        assert quantum_walk_length(row).length == pytest.approx(expected, abs=1e-12)


def test_walk_periodicity_in_pi():
    rng = np.random.default_rng(11)
    for k in (-3, 1, 5):
        row = rng.uniform(-2, 2, 6)
        assert quantum_walk_length(row + math.pi * k).length == pytest.approx(
            quantum_walk_length(row).length, abs=1e-9
        )


def test_walk_cyclic_and_reversal_invariance():
    rng = np.random.default_rng(13)
    row = rng.uniform(-4, 4, 7)
    base = quantum_walk_length(row).length
    for shift in range(1, 7):
        rolled = np.roll(row, shift)
        assert quantum_walk_length(rolled).length == pytest.approx(base, abs=1e-9)
    assert quantum_walk_length(row[::-1]).length == pytest.approx(base, abs=1e-9)


# ---------------- transform_dataset / kernels ----------------


def test_transform_empty_sequence():
    assert transform_dataset([]) == []


def test_transform_single_row():
    out = transform_dataset([[0.0, math.pi / 2]])
    assert len(out) == 1
    assert out[0].row_index == 0
    assert out[0].length == pytest.approx(2.0, abs=1e-9)


def test_transform_preserves_order_and_cardinality():
    rng = np.random.default_rng(19)
    rows = rng.normal(size=(1000, 5))
    out = transform_dataset(rows, reps=2)
    assert [f.row_index for f in out] == list(range(1000))
    singles = [quantum_walk_length(r, reps=2).length for r in rows]
    assert np.allclose([f.length for f in out], singles, atol=1e-12)


def test_transform_rejects_ragged_rows():
    with pytest.raises(InvalidInputError):
        transform_dataset([[1.0, 2.0], [1.0, 2.0, 3.0]])


def test_backends_agree():
    rng = np.random.default_rng(23)
    rows = np.ascontiguousarray(rng.normal(size=(400, 7)) * 4)
    for reps in (1, 2, 3):
        active = walk_lengths(rows, reps)
        fallback = _pure.walk_lengths(rows, reps)
        assert np.abs(active - fallback).max() < 1e-12


def test_backend_flag_is_reported():
    assert embed.BACKEND in ("compiled", "python")
