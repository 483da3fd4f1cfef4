"""
Dense complex linear algebra for desk-scale Hilbert spaces.

Operators and vectors are wrapped in small immutable value types so they can
be shared freely between threads; the heavy lifting is numpy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from utils.config import PROBABILITY_SLACK, get_max_dim, resolve_tol
from utils.errors import (
    DimensionMismatchError,
    InvalidStateError,
    NonHermitianError,
    NumericalIntegrityError,
)

logger = logging.getLogger(__name__)


def _frozen_array(values, ndim):
    arr = np.array(values, dtype=complex)
    if arr.ndim != ndim:
        raise DimensionMismatchError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionMismatchError("empty array")
    if not np.all(np.isfinite(arr)):
        raise NumericalIntegrityError("array contains NaN or Inf entries")
    if arr.shape[0] > get_max_dim():
        raise DimensionMismatchError(f"dimension {arr.shape[0]} exceeds the maximum {get_max_dim()}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ComplexOperator:
    """Square complex matrix acting on a finite-dimensional Hilbert space"""

    matrix: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.matrix, 2)
        if arr.shape[0] != arr.shape[1]:
            raise DimensionMismatchError(f"operator must be square, got shape {arr.shape}")
        object.__setattr__(self, "matrix", arr)

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def zeros(cls, dim):
        return cls(np.zeros((dim, dim), dtype=complex))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def trace(self):
        return complex(np.trace(self.matrix))

    def dagger(self):
        return ComplexOperator(self.matrix.conj().T)

    def apply(self, vector):
        """Act on a StateVector; the result is generally not normalized"""
        _require_same_dim(self.dim, vector.dim)
        return self.matrix @ vector.amplitudes

    def __matmul__(self, other):
        if not isinstance(other, ComplexOperator):
            return NotImplemented
        _require_same_dim(self.dim, other.dim)
        return ComplexOperator(self.matrix @ other.matrix)

    def __add__(self, other):
        if not isinstance(other, ComplexOperator):
            return NotImplemented
        _require_same_dim(self.dim, other.dim)
        return ComplexOperator(self.matrix + other.matrix)

    def __sub__(self, other):
        if not isinstance(other, ComplexOperator):
            return NotImplemented
        _require_same_dim(self.dim, other.dim)
        return ComplexOperator(self.matrix - other.matrix)

    def __mul__(self, scalar):
        if isinstance(scalar, ComplexOperator):
            return NotImplemented
        return ComplexOperator(self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexOperator(-self.matrix)

    def distance(self, other):
        """Frobenius norm of the difference"""
        _require_same_dim(self.dim, other.dim)
        return float(np.linalg.norm(self.matrix - other.matrix))

    def allclose(self, other, tol=None):
        return self.distance(other) <= resolve_tol(tol)

    def is_hermitian(self, tol=None):
        return bool(np.allclose(self.matrix, self.matrix.conj().T, rtol=0.0, atol=resolve_tol(tol)))

    def is_positive_semidefinite(self, tol=None):
        tol = resolve_tol(tol)
        if not self.is_hermitian(tol):
            return False
        hermitian_part = (self.matrix + self.matrix.conj().T) / 2
        return bool(np.linalg.eigvalsh(hermitian_part).min() >= -tol)

    def is_projector(self, tol=None):
        tol = resolve_tol(tol)
        if not self.is_hermitian(tol):
            return False
        return bool(np.allclose(self.matrix @ self.matrix, self.matrix, rtol=0.0, atol=tol))

    def is_density(self, tol=None):
        tol = resolve_tol(tol)
        return self.is_positive_semidefinite(tol) and abs(self.trace() - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit vector of a finite-dimensional Hilbert space"""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.amplitudes, 1)
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > resolve_tol(None):
            raise InvalidStateError(f"state vector must have unit norm, got {norm:.12g}")
        object.__setattr__(self, "amplitudes", arr)

    @classmethod
    def normalized(cls, amplitudes, tol=None):
        """
        Build a unit vector from arbitrary (nonzero) amplitudes

        Parameters:
        - amplitudes: Sequence of complex numbers
        - tol: Norms at or below this value are treated as zero

        Returns:
        - StateVector pointing along amplitudes
        """
        arr = np.array(amplitudes, dtype=complex)
        norm = np.linalg.norm(arr)
        if not np.isfinite(norm) or norm <= resolve_tol(tol):
            raise InvalidStateError("cannot normalize a zero vector")
        return cls(arr / norm)

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    def projector(self):
        """|psi><psi|"""
        return ComplexOperator(np.outer(self.amplitudes, self.amplitudes.conj()))

    def inner(self, other):
        """<self|other>"""
        _require_same_dim(self.dim, other.dim)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def expectation(self, op):
        """<psi|A|psi>"""
        return complex(np.vdot(self.amplitudes, op.apply(self)))

    def with_canonical_phase(self, tol=None):
        """
        Same ray with the first nonzero amplitude made real and positive
        """
        tol = resolve_tol(tol)
        nonzero = np.flatnonzero(np.abs(self.amplitudes) > tol)
        if nonzero.size == 0:
            return self
        lead = self.amplitudes[nonzero[0]]
        return StateVector(self.amplitudes * (abs(lead) / lead))

    def allclose(self, other, tol=None):
        _require_same_dim(self.dim, other.dim)
        return bool(np.linalg.norm(self.amplitudes - other.amplitudes) <= resolve_tol(tol))

    def same_ray(self, other, tol=None):
        """True when the two vectors differ only by a global phase"""
        return abs(abs(self.inner(other)) - 1.0) <= resolve_tol(tol)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    Finite projection-valued measure: distinct increasing eigenvalues paired
    with mutually orthogonal eigenprojectors summing to the identity
    """

    eigenvalues: tuple
    projectors: tuple

    def __post_init__(self):
        eigenvalues = tuple(float(v) for v in self.eigenvalues)
        projectors = tuple(self.projectors)
        if len(eigenvalues) != len(projectors) or not eigenvalues:
            raise DimensionMismatchError("eigenvalues and projectors must pair up one to one")
        if any(b <= a for a, b in zip(eigenvalues, eigenvalues[1:])):
            raise ValueError("eigenvalues must be strictly increasing")
        dims = {p.dim for p in projectors}
        if len(dims) != 1:
            raise DimensionMismatchError("projectors act on different spaces")
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "projectors", projectors)

    @property
    def dim(self):
        return self.projectors[0].dim

    def reconstruct(self):
        """Sum of lambda_k P_k"""
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for value, proj in zip(self.eigenvalues, self.projectors):
            total += value * proj.matrix
        return ComplexOperator(total)

    def is_valid(self, tol=None):
        tol = resolve_tol(tol)
        if not all(p.is_projector(tol) for p in self.projectors):
            return False
        for i, p in enumerate(self.projectors):
            for q in self.projectors[i + 1:]:
                if np.linalg.norm((p @ q).matrix) > tol:
                    return False
        total = sum((p.matrix for p in self.projectors), np.zeros((self.dim, self.dim), dtype=complex))
        return bool(np.allclose(total, np.eye(self.dim), rtol=0.0, atol=tol))


def _require_same_dim(dim_a, dim_b):
    if dim_a != dim_b:
        raise DimensionMismatchError(f"dimension mismatch: {dim_a} vs {dim_b}")


def tensor_product(a, b):
    """
    Kronecker product of two operators

    Parameters:
    - a: Operator on the first factor
    - b: Operator on the second factor

    Returns:
    - ComplexOperator of dimension a.dim * b.dim
    """
    return ComplexOperator(np.kron(a.matrix, b.matrix))


def tensor_vectors(u, v):
    """|u> (x) |v>"""
    return StateVector(np.kron(u.amplitudes, v.amplitudes))


def lift_first(a, dim_second):
    """a (x) I on H (x) G"""
    return tensor_product(a, ComplexOperator.identity(dim_second))


def partial_trace_second(rho, dim_first, dim_second):
    """
    Trace out the second factor of an operator on H (x) G

    Parameters:
    - rho: Operator of dimension dim_first * dim_second
    - dim_first: Dimension of H (kept)
    - dim_second: Dimension of G (traced over)

    Returns:
    - ComplexOperator on H
    """
    if dim_first < 1 or dim_second < 1 or rho.dim != dim_first * dim_second:
        raise DimensionMismatchError(
            f"operator of dimension {rho.dim} does not factor as {dim_first} x {dim_second}"
        )
    blocks = rho.matrix.reshape(dim_first, dim_second, dim_first, dim_second)
    return ComplexOperator(np.einsum("ijkj->ik", blocks))


def spectral_decompose(h, tol=None):
    """
    Spectral decomposition of a Hermitian operator with degenerate
    eigenvalues merged into a single eigenprojector

    Parameters:
    - h: Hermitian operator
    - tol: Hermiticity tolerance and eigenvalue merging threshold

    Returns:
    - SpectralDecomposition with strictly increasing eigenvalues
    """
    tol = resolve_tol(tol)
    if not h.is_hermitian(tol):
        raise NonHermitianError("spectral decomposition requires a Hermitian operator")

    values, vectors = np.linalg.eigh((h.matrix + h.matrix.conj().T) / 2)

    # eigh returns ascending eigenvalues; group runs closer than tol
    groups = [[0]]
    for k in range(1, len(values)):
        if values[k] - values[groups[-1][-1]] <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])

    eigenvalues = []
    projectors = []
    for group in groups:
        basis = vectors[:, group]
        eigenvalues.append(float(np.mean(values[group])))
        projectors.append(ComplexOperator(basis @ basis.conj().T))

    logger.debug("spectral decomposition: %d distinct eigenvalues in dimension %d", len(groups), h.dim)
    return SpectralDecomposition(tuple(eigenvalues), tuple(projectors))


def trace_product(a, b):
    """Tr(ab) without forming the product"""
    _require_same_dim(a.dim, b.dim)
    return complex(np.einsum("ij,ji->", a.matrix, b.matrix))


def checked_probability(raw, label="probability", slack=None):
    """
    Validate and clamp a computed probability

    Parameters:
    - raw: Real (or complex with negligible imaginary part) value
    - label: Name used in diagnostics
    - slack: Allowed excursion outside [0, 1] (default PROBABILITY_SLACK)

    Returns:
    - float clamped to [0, 1]
    """
    slack = PROBABILITY_SLACK if slack is None else slack
    value = complex(raw)
    if abs(value.imag) > slack:
        raise NumericalIntegrityError(f"{label} has imaginary part {value.imag:.3g}")
    real = value.real
    if not np.isfinite(real) or real < -slack or real > 1.0 + slack:
        raise NumericalIntegrityError(f"{label} = {real!r} lies outside [0, 1]")
    if real < 0.0 or real > 1.0:
        logger.debug("clamping %s = %.17g into [0, 1]", label, real)
    return min(max(real, 0.0), 1.0)
