"""
Generalized observables: a quantum observable with finite spectrum plus the
no-registration outcome a0, outcome sets over that extended value set,
spectral projectors and detection-weighted effect operators.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from utils.config import resolve_tol
from utils.errors import DimensionMismatchError, UnknownEigenvalueError
from utils.linalg import ComplexOperator, spectral_decompose

logger = logging.getLogger(__name__)

A0_LABEL = "a0"

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class GeneralizedObservable:
    """
    Observable A0: the spectral decomposition of a Hermitian operator together
    with a symbolic no-registration outcome that is never a real number
    """

    name: str
    spectral: object
    a0_label: str = A0_LABEL

    def __post_init__(self):
        if not isinstance(self.a0_label, str):
            raise ValueError("the no-registration outcome must be a symbolic label, not a number")

    @classmethod
    def from_operator(cls, name, operator, tol=None, a0_label=A0_LABEL):
        """
        Build a generalized observable from a Hermitian operator

        Parameters:
        - name: Identifier used by detection tables and configs
        - operator: ComplexOperator or array-like Hermitian matrix
        - tol: Hermiticity tolerance and degenerate-eigenvalue merge threshold

        Returns:
        - GeneralizedObservable
        """
        if not isinstance(operator, ComplexOperator):
            operator = ComplexOperator(operator)
        return cls(name, spectral_decompose(operator, tol), a0_label)

    @property
    def dim(self):
        return self.spectral.dim

    @property
    def eigenvalues(self):
        return self.spectral.eigenvalues

    def operator(self):
        return self.spectral.reconstruct()

    def index_of(self, value, tol=None):
        """Position of value in the spectrum, matched within tol"""
        tol = resolve_tol(tol)
        for k, eigenvalue in enumerate(self.eigenvalues):
            if abs(eigenvalue - value) <= tol:
                return k
        raise UnknownEigenvalueError(f"{value!r} is not an eigenvalue of observable {self.name!r}")

    def canonical_eigenvalue(self, value, tol=None):
        return self.eigenvalues[self.index_of(value, tol)]

    def eigenprojector(self, value, tol=None):
        return self.spectral.projectors[self.index_of(value, tol)]

    def outcomes(self, values=(), includes_a0=False, tol=None):
        """OutcomeSet of this observable with values snapped onto the spectrum"""
        return OutcomeSet(frozenset(self.canonical_eigenvalue(v, tol) for v in values), includes_a0)

    def full_outcomes(self, includes_a0=False):
        return OutcomeSet(frozenset(self.eigenvalues), includes_a0)


@dataclass(frozen=True)
class OutcomeSet:
    """Finite subset of the extended value set: eigenvalues, optionally with a0"""

    eigen_subset: frozenset = field(default_factory=frozenset)
    includes_a0: bool = False

    def __post_init__(self):
        object.__setattr__(self, "eigen_subset", frozenset(float(v) for v in self.eigen_subset))
        object.__setattr__(self, "includes_a0", bool(self.includes_a0))

    def __contains__(self, value):
        return value in self.eigen_subset

    def describe(self, a0_label=A0_LABEL):
        parts = [f"{v:g}" for v in sorted(self.eigen_subset)]
        if self.includes_a0:
            parts.append(a0_label)
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True, eq=False)
class Property:
    """Macroscopic property F = (A0, X)"""

    observable: GeneralizedObservable
    outcomes: OutcomeSet

    def __post_init__(self):
        # snap to the spectrum so later lookups can use exact membership
        snapped = self.observable.outcomes(self.outcomes.eigen_subset, self.outcomes.includes_a0)
        object.__setattr__(self, "outcomes", snapped)

    @property
    def in_F_class(self):
        """True when a0 is not among the outcomes"""
        return not self.outcomes.includes_a0

    def complement(self):
        return Property(self.observable, complement(self.outcomes, self.observable))

    def __repr__(self):
        return f"Property({self.observable.name}, {self.outcomes.describe(self.observable.a0_label)})"


def _check_subset(obs, x):
    spectrum = set(obs.eigenvalues)
    unknown = [v for v in x.eigen_subset if v not in spectrum]
    if unknown:
        # tolerate values that only differ from the spectrum by round-off
        for value in unknown:
            obs.index_of(value)
        return obs.outcomes(x.eigen_subset, x.includes_a0)
    return x


def projector(obs, x):
    """
    Spectral projector P(X): sum of the eigenprojectors of the eigenvalues in X.
    a0 has no quantum projector and is ignored.
    """
    x = _check_subset(obs, x)
    total = np.zeros((obs.dim, obs.dim), dtype=complex)
    for value, proj in zip(obs.eigenvalues, obs.spectral.projectors):
        if value in x.eigen_subset:
            total += proj.matrix
    return ComplexOperator(total)


def effect(obs, x, model, state_repr):
    """
    Detection-weighted effect operator T(X)

    Parameters:
    - obs: GeneralizedObservable
    - x: OutcomeSet
    - model: DetectionModel supplying d(state_repr, obs, lambda)
    - state_repr: VectorRepr or DensityRepr of the measured state

    Returns:
    - ComplexOperator: sum over X of d P_lambda when a0 is not in X,
      otherwise I minus the same sum over the eigenvalues outside X
    """
    if state_repr.dim != obs.dim:
        raise DimensionMismatchError(
            f"state of dimension {state_repr.dim} cannot be measured with {obs.name!r} of dimension {obs.dim}"
        )
    x = _check_subset(obs, x)

    weighted = np.zeros((obs.dim, obs.dim), dtype=complex)
    for value, proj in zip(obs.eigenvalues, obs.spectral.projectors):
        selected = value in x.eigen_subset
        # with a0 in X the sum runs over the eigenvalues left out of X
        if selected != x.includes_a0:
            weighted += model.probability(state_repr, obs, value) * proj.matrix

    if x.includes_a0:
        return ComplexOperator(np.eye(obs.dim, dtype=complex) - weighted)
    return ComplexOperator(weighted)


def complement(x, obs):
    """X^c relative to spectrum and a0: exactly one of X, X^c contains a0"""
    x = _check_subset(obs, x)
    rest = frozenset(v for v in obs.eigenvalues if v not in x.eigen_subset)
    return OutcomeSet(rest, not x.includes_a0)


def spin_matrix(theta, phi):
    """sigma_n = sin(t)cos(p) sigma_x + sin(t)sin(p) sigma_y + cos(t) sigma_z"""
    return (
        math.sin(theta) * math.cos(phi) * PAULI_X
        + math.sin(theta) * math.sin(phi) * PAULI_Y
        + math.cos(theta) * PAULI_Z
    )


def spin_observable(theta, phi=0.0, name="sigma_n"):
    """Spin-1/2 observable along the direction n(theta, phi), angles in radians"""
    return GeneralizedObservable.from_operator(name, spin_matrix(theta, phi))


def pauli_observable(axis):
    """sigma_x, sigma_y or sigma_z as a generalized observable"""
    matrices = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}
    try:
        matrix = matrices[axis]
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None
    return GeneralizedObservable.from_operator(f"sigma_{axis}", matrix)
