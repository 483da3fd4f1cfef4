"""
State kinds: pure states, proper mixtures (kept as their preparation
recipe) and improper mixtures (a reduced density operator, optionally with
the composite vector it came from), plus the property-indexed
representation of proper mixtures.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from utils.config import MIN_COMPONENT_WEIGHT, resolve_tol
from utils.errors import (
    DimensionMismatchError,
    InvalidStateError,
    NoRegistrationOutcomeError,
    ZeroTotalDetectionError,
)
from utils.linalg import ComplexOperator, StateVector, partial_trace_second, trace_product

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class VectorRepr:
    """State handed to a detection model as a unit vector"""

    vector: StateVector

    @property
    def dim(self):
        return self.vector.dim

    def density(self):
        return self.vector.projector()


@dataclass(frozen=True, eq=False)
class DensityRepr:
    """State handed to a detection model as a density operator"""

    rho: ComplexOperator

    def __post_init__(self):
        if not self.rho.is_density():
            raise InvalidStateError("DensityRepr requires a density operator")

    @property
    def dim(self):
        return self.rho.dim

    def density(self):
        return self.rho


StateRepr = Union[VectorRepr, DensityRepr]


@dataclass(frozen=True, eq=False)
class PureState:
    vector: StateVector
    label: str = ""

    @property
    def dim(self):
        return self.vector.dim

    def density(self):
        return self.vector.projector()

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.dim == other.dim and self.vector.allclose(other.vector)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MixtureComponent:
    state: PureState
    weight: float
    device_id: int


@dataclass(frozen=True, eq=False)
class ProperMixture:
    """
    Mixture prepared by mingling ensembles of pure states. The ordered
    component list is the state; no merged density operator is stored.
    """

    components: tuple

    @property
    def dim(self):
        return self.components[0].state.dim

    @property
    def weights(self):
        return tuple(c.weight for c in self.components)

    def qm_density(self):
        """Standard QM density operator sum_j p_j |psi_j><psi_j|"""
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for c in self.components:
            total += c.weight * c.state.density().matrix
        return ComplexOperator(total)

    def __eq__(self, other):
        # operational equality: same recipe, not same density operator
        if not isinstance(other, ProperMixture):
            return NotImplemented
        if len(self.components) != len(other.components) or self.dim != other.dim:
            return False
        tol = resolve_tol(None)
        return all(
            a.device_id == b.device_id
            and abs(a.weight - b.weight) <= tol
            and a.state == b.state
            for a, b in zip(self.components, other.components)
        )

    __hash__ = None


@dataclass(frozen=True)
class CompositeProvenance:
    psi: StateVector
    dim_first: int
    dim_second: int


@dataclass(frozen=True, eq=False)
class ImproperMixture:
    rho: ComplexOperator
    provenance: Optional[CompositeProvenance] = None
    label: str = ""

    def __post_init__(self):
        if not self.rho.is_density():
            raise InvalidStateError("an improper mixture needs a valid density operator")

    @property
    def dim(self):
        return self.rho.dim

    @property
    def is_pure(self):
        """Rank one, i.e. Tr(rho^2) = 1"""
        purity = trace_product(self.rho, self.rho).real
        return abs(purity - 1.0) <= math.sqrt(resolve_tol(None))

    def pure_vector(self):
        """Unit vector spanning a rank-one rho, with canonical phase"""
        if not self.is_pure:
            raise InvalidStateError("density operator is not rank one")
        values, vectors = np.linalg.eigh(self.rho.matrix)
        return StateVector.normalized(vectors[:, int(np.argmax(values))]).with_canonical_phase()


State = Union[PureState, ProperMixture, ImproperMixture]


@dataclass(frozen=True, eq=False)
class EsrPair:
    """(rho_M(F), p_M^d(F)) for one property F"""

    rho_of_F: ComplexOperator
    pd_of_F: float

    def __post_init__(self):
        if not self.rho_of_F.is_density():
            raise InvalidStateError("rho_of_F must be a density operator")
        if not 0.0 <= self.pd_of_F <= 1.0:
            raise ValueError(f"pd_of_F must lie in [0, 1], got {self.pd_of_F}")


def make_pure(v, label=""):
    """
    Build a pure state

    Parameters:
    - v: StateVector or sequence of amplitudes (normalized on the way in)
    - label: Free-form name

    Returns:
    - PureState
    """
    amplitudes = v.amplitudes if isinstance(v, StateVector) else v
    return PureState(StateVector.normalized(amplitudes), label)


def basis_state(dim, index, label=""):
    amplitudes = np.zeros(dim, dtype=complex)
    amplitudes[index] = 1.0
    return PureState(StateVector(amplitudes), label or f"e{index}")


def spin_up_state(theta, phi=0.0, label="+n"):
    """|+_n> = cos(t/2)|+> + e^{i p} sin(t/2)|->"""
    amplitudes = [math.cos(theta / 2), cmath.exp(1j * phi) * math.sin(theta / 2)]
    return make_pure(amplitudes, label)


def spin_down_state(theta, phi=0.0, label="-n"):
    amplitudes = [-cmath.exp(-1j * phi) * math.sin(theta / 2), math.cos(theta / 2)]
    return make_pure(amplitudes, label)


def make_proper_mixture(components):
    """
    Build a proper mixture from its preparation recipe

    Parameters:
    - components: Sequence of (PureState, weight) or (PureState, weight, device_id)
      tuples, or MixtureComponent objects. Device ids default to the position.

    Returns:
    - ProperMixture preserving the given order
    """
    components = list(components)
    if not components:
        raise InvalidStateError("a proper mixture needs at least one component")

    built = []
    for position, item in enumerate(components):
        if isinstance(item, MixtureComponent):
            state, weight, device_id = item.state, item.weight, item.device_id
        elif len(item) == 2:
            (state, weight), device_id = item, position
        else:
            state, weight, device_id = item

        if not isinstance(state, PureState):
            raise InvalidStateError(
                f"component {position} is a {type(state).__name__}; mixtures of mixtures are not supported"
            )
        weight = float(weight)
        if not MIN_COMPONENT_WEIGHT <= weight <= 1.0 + resolve_tol(None):
            raise InvalidStateError(f"component {position} has weight {weight}, expected a value in (0, 1]")
        built.append(MixtureComponent(state, weight, int(device_id)))

    if len({c.state.dim for c in built}) != 1:
        raise DimensionMismatchError("mixture components live in different Hilbert spaces")
    if len({c.device_id for c in built}) != len(built):
        raise InvalidStateError("component device ids must be unique")
    total = sum(c.weight for c in built)
    if abs(total - 1.0) > resolve_tol(None):
        raise InvalidStateError(f"component weights sum to {total:.12g}, expected 1")

    return ProperMixture(tuple(built))


def make_improper_from_composite(psi, dim_first, dim_second, label=""):
    """
    Reduced state of the first subsystem of a composite pure state

    Parameters:
    - psi: StateVector or amplitudes on H (x) G
    - dim_first: Dimension of H
    - dim_second: Dimension of G

    Returns:
    - ImproperMixture with rho = Tr_G |Psi><Psi| and the provenance recorded
    """
    if not isinstance(psi, StateVector):
        psi = StateVector.normalized(psi)
    if psi.dim != dim_first * dim_second:
        raise DimensionMismatchError(
            f"composite vector of dimension {psi.dim} does not factor as {dim_first} x {dim_second}"
        )
    rho = partial_trace_second(psi.projector(), dim_first, dim_second)
    # partial trace of a projector is Hermitian up to round-off; symmetrize
    rho = ComplexOperator((rho.matrix + rho.matrix.conj().T) / 2)
    mixture = ImproperMixture(rho, CompositeProvenance(psi, dim_first, dim_second), label)
    logger.debug("reduced state of %dx%d composite: pure=%s", dim_first, dim_second, mixture.is_pure)
    return mixture


def make_improper(rho, label=""):
    """Improper mixture given directly by its density operator"""
    if not isinstance(rho, ComplexOperator):
        rho = ComplexOperator(rho)
    return ImproperMixture(rho, None, label)


def state_repr_of(state):
    """StateRepr a detection model sees for a pure state or improper mixture"""
    if isinstance(state, PureState):
        return VectorRepr(state.vector)
    if isinstance(state, ImproperMixture):
        return DensityRepr(state.rho)
    raise InvalidStateError("proper mixtures are evaluated component by component")


def esr_representation(m, prop, model):
    """
    Property-dependent representation of a proper mixture

    Parameters:
    - m: ProperMixture
    - prop: Property with a0 not among its outcomes
    - model: DetectionModel (component-aware models see each component's device id)

    Returns:
    - EsrPair(rho_M(F), p_M^d(F)) with rho_M(F) the Bayes-weighted mixture of
      the component density operators
    """
    from utils.detection import bayes_weights, detect_prob_property

    if not prop.in_F_class:
        raise NoRegistrationOutcomeError("the representation is indexed by properties without a0")

    weights = bayes_weights(m, prop, model)
    pd_of_F = detect_prob_property(model, m, prop)

    rho = np.zeros((m.dim, m.dim), dtype=complex)
    for weight, component in zip(weights, m.components):
        rho += weight * component.state.density().matrix
    return EsrPair(ComplexOperator(rho), min(max(pd_of_F, 0.0), 1.0))


def esr_density_from_traces(m, prop, model):
    """
    rho_M(F) computed from the trace quotients Tr[rho_j T_j(X)] / Tr[rho_j P(X)]
    rather than from per-component detection probabilities
    """
    from utils.detection import detect_prob_property
    from utils.observables import effect, projector

    if not prop.in_F_class:
        raise NoRegistrationOutcomeError("the representation is indexed by properties without a0")

    tol = resolve_tol(None)
    p_x = projector(prop.observable, prop.outcomes)
    numerators = []
    for component in m.components:
        component_model = model.for_component(component.device_id)
        rho_j = component.state.density()
        t_x = effect(prop.observable, prop.outcomes, component_model, VectorRepr(component.state.vector))
        denominator = trace_product(rho_j, p_x).real
        if denominator > tol:
            ratio = trace_product(rho_j, t_x).real / denominator
        else:
            ratio = detect_prob_property(component_model, component.state, prop)
        numerators.append(component.weight * ratio)

    total = sum(numerators)
    if total <= tol:
        raise ZeroTotalDetectionError(f"{prop!r} is never detected on this mixture")
    rho = np.zeros((m.dim, m.dim), dtype=complex)
    for numerator, component in zip(numerators, m.components):
        rho += (numerator / total) * component.state.density().matrix
    return ComplexOperator(rho)
