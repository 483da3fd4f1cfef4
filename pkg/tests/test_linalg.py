import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from data.sample_data import random_hermitian, random_state_vector
from utils.errors import DimensionMismatchError, InvalidStateError, NonHermitianError, NumericalIntegrityError
from utils.linalg import (
    ComplexOperator,
    StateVector,
    checked_probability,
    lift_first,
    partial_trace_second,
    spectral_decompose,
    tensor_product,
    tensor_vectors,
    trace_product,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(seed=seeds, dim=st.integers(min_value=1, max_value=5))
@settings(max_examples=60, deadline=None)
def test_spectral_decomposition_reconstructs(seed, dim):
    rng = np.random.default_rng(seed)
    h = ComplexOperator(random_hermitian(rng, dim))
    spectral = spectral_decompose(h)
    assert spectral.is_valid(1e-9)
    np.testing.assert_allclose(spectral.reconstruct().matrix, h.matrix, atol=1e-9)
    assert list(spectral.eigenvalues) == sorted(spectral.eigenvalues)


def test_degenerate_eigenvalues_are_merged():
    h = ComplexOperator(np.diag([1.0, 1.0, -2.0]))
    spectral = spectral_decompose(h)
    assert spectral.eigenvalues == (-2.0, 1.0)
    np.testing.assert_allclose(spectral.projectors[1].matrix, np.diag([1, 1, 0]), atol=1e-12)


def test_non_hermitian_is_rejected():
    with pytest.raises(NonHermitianError):
        spectral_decompose(ComplexOperator([[0, 1], [0, 0]]))


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(3)
    u = random_state_vector(rng, 2)
    v = random_state_vector(rng, 3)
    rho = tensor_vectors(u, v).projector()
    np.testing.assert_allclose(partial_trace_second(rho, 2, 3).matrix, u.projector().matrix, atol=1e-12)


def test_partial_trace_rejects_bad_factorization():
    with pytest.raises(DimensionMismatchError):
        partial_trace_second(ComplexOperator.identity(4), 3, 2)


@given(seed=seeds)
@settings(max_examples=30, deadline=None)
def test_lifted_operator_traces_against_reduced_state(seed):
    rng = np.random.default_rng(seed)
    psi = random_state_vector(rng, 6)
    a = ComplexOperator(random_hermitian(rng, 2))
    rho = psi.projector()
    reduced = partial_trace_second(rho, 2, 3)
    assert trace_product(rho, lift_first(a, 3)) == pytest.approx(trace_product(reduced, a), abs=1e-12)


def test_tensor_product_dimension():
    assert tensor_product(ComplexOperator.identity(2), ComplexOperator.identity(3)).dim == 6


def test_state_vector_norm_and_phase():
    with pytest.raises(InvalidStateError):
        StateVector([1.0, 1.0])
    with pytest.raises(InvalidStateError):
        StateVector.normalized([0.0, 0.0])
    v = StateVector.normalized([1j, 1j])
    canonical = v.with_canonical_phase()
    assert canonical.amplitudes[0].real > 0
    assert abs(canonical.amplitudes[0].imag) < 1e-15
    assert v.same_ray(canonical)


def test_operators_are_immutable():
    op = ComplexOperator.identity(2)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2


def test_max_dim_is_enforced(monkeypatch):
    monkeypatch.setenv("ESR_MAX_DIM", "3")
    with pytest.raises(DimensionMismatchError):
        ComplexOperator.identity(4)


@pytest.mark.parametrize(
    "raw, expected",
    [(0.5, 0.5), (1.0 + 5e-11, 1.0), (-5e-11, 0.0), (0.25 + 1e-13j, 0.25)],
)
def test_checked_probability_clamps_round_off(raw, expected):
    assert checked_probability(raw) == expected


@pytest.mark.parametrize("raw", [1.1, -0.01, 0.5 + 1e-3j, float("nan")])
def test_checked_probability_rejects_real_violations(raw):
    with pytest.raises(NumericalIntegrityError):
        checked_probability(raw)
