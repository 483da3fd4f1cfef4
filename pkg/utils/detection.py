"""
Detection-probability models d(state, observable, eigenvalue) and the
detection probability of a whole property.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional

from utils.config import resolve_tol
from utils.errors import (
    DetectionRangeError,
    MissingDetectionEntryError,
    NoRegistrationOutcomeError,
    UndefinedDetectionError,
    ZeroTotalDetectionError,
)
from utils.linalg import checked_probability, trace_product
from utils.observables import effect, projector
from utils.states import (  # noqa: F401  (StateRepr types are part of this module's interface)
    DensityRepr,
    ImproperMixture,
    PureState,
    ProperMixture,
    StateRepr,
    VectorRepr,
    state_repr_of,
)

logger = logging.getLogger(__name__)


def _require_unit_interval(value, what):
    if not 0.0 <= value <= 1.0:
        raise DetectionRangeError(f"{what} = {value!r} is outside [0, 1]")
    return value


class DetectionModel:
    """
    Base class of detection models. Subclasses implement evaluate(); callers
    go through probability(), which enforces the [0, 1] range.
    """

    def evaluate(self, state_repr, obs, eigenvalue):
        raise NotImplementedError

    def probability(self, state_repr, obs, eigenvalue):
        value = float(self.evaluate(state_repr, obs, eigenvalue))
        return _require_unit_interval(value, f"detection probability for ({obs.name}, {eigenvalue:g})")

    def for_component(self, device_id):
        """Model governing the mixture component prepared by device_id"""
        return self


@dataclass(frozen=True)
class IdealDetection(DetectionModel):
    def evaluate(self, state_repr, obs, eigenvalue):
        return 1.0


@dataclass(frozen=True)
class ConstantDetection(DetectionModel):
    value: float

    def __post_init__(self):
        _require_unit_interval(float(self.value), "constant detection probability")

    def evaluate(self, state_repr, obs, eigenvalue):
        return self.value


@dataclass(frozen=True, eq=False)
class PerEigenvalueDetection(DetectionModel):
    """
    Table keyed by (observable name, eigenvalue). Eigenvalues are matched
    within tolerance. Without a default, a missing key is an error.
    """

    table: Mapping = field(default_factory=dict)
    default: Optional[float] = None

    def __post_init__(self):
        entries = {}
        for (name, eigenvalue), value in dict(self.table).items():
            entries[(str(name), float(eigenvalue))] = _require_unit_interval(
                float(value), f"table entry ({name}, {eigenvalue})"
            )
        object.__setattr__(self, "table", MappingProxyType(entries))
        if self.default is not None:
            _require_unit_interval(float(self.default), "table default")

    def __eq__(self, other):
        if not isinstance(other, PerEigenvalueDetection):
            return NotImplemented
        return dict(self.table) == dict(other.table) and self.default == other.default

    def __hash__(self):
        return hash((frozenset(self.table.items()), self.default))

    def evaluate(self, state_repr, obs, eigenvalue):
        tol = resolve_tol(None)
        for (name, key), value in self.table.items():
            if name == obs.name and abs(key - eigenvalue) <= tol:
                return value
        if self.default is None:
            raise MissingDetectionEntryError(f"no detection entry for ({obs.name}, {eigenvalue:g})")
        return self.default


@dataclass(frozen=True, eq=False)
class ComponentDetection(DetectionModel):
    """
    One model per mixture component, keyed by the component's device id.
    Outside a mixture the default model applies.
    """

    models: Mapping = field(default_factory=dict)
    default: Optional[DetectionModel] = None

    def __post_init__(self):
        object.__setattr__(self, "models", MappingProxyType({int(k): v for k, v in dict(self.models).items()}))

    def for_component(self, device_id):
        model = self.models.get(device_id, self.default)
        if model is None:
            raise MissingDetectionEntryError(f"no detection model for component {device_id}")
        return model

    def evaluate(self, state_repr, obs, eigenvalue):
        if self.default is None:
            raise MissingDetectionEntryError("component detection model used outside a mixture")
        return self.default.evaluate(state_repr, obs, eigenvalue)


@dataclass(frozen=True, eq=False)
class CustomDetection(DetectionModel):
    """Wraps a pure function (state_repr, obs, eigenvalue) -> probability"""

    evaluator: Callable
    name: str = "custom"

    def evaluate(self, state_repr, obs, eigenvalue):
        return self.evaluator(state_repr, obs, eigenvalue)


def detect_prob_eigenvalue(model, state_repr, obs, lam):
    """
    Detection probability d(state, A, lambda) for one eigenvalue

    Parameters:
    - model: DetectionModel
    - state_repr: VectorRepr or DensityRepr
    - obs: GeneralizedObservable
    - lam: Eigenvalue of obs (matched within tolerance)

    Returns:
    - float in [0, 1]
    """
    return model.probability(state_repr, obs, obs.canonical_eigenvalue(lam))


def detect_prob_property(model, state, prop):
    """
    Detection probability p^d(F) of a property F without a0

    Parameters:
    - model: DetectionModel
    - state: PureState, ProperMixture or ImproperMixture
    - prop: Property

    Returns:
    - Tr[rho T(X)] / Tr[rho P(X)] for pure states and improper mixtures,
      the weighted average of the component values for proper mixtures
    """
    if not prop.in_F_class:
        raise NoRegistrationOutcomeError("detection probability is defined for properties without a0")

    if isinstance(state, ProperMixture):
        total = 0.0
        for component in state.components:
            total += component.weight * detect_prob_property(
                model.for_component(component.device_id), component.state, prop
            )
        return checked_probability(total, "mixture detection probability")

    state_repr = state_repr_of(state)
    rho = state_repr.density()
    obs, outcomes = prop.observable, prop.outcomes

    denominator = trace_product(rho, projector(obs, outcomes)).real
    if denominator > resolve_tol(None):
        numerator = trace_product(rho, effect(obs, outcomes, model, state_repr)).real
        return checked_probability(numerator / denominator, "detection probability")

    # Tr[rho P(X)] = 0: only a value shared by every eigenvalue of X is well defined
    values = [model.probability(state_repr, obs, value) for value in sorted(outcomes.eigen_subset)]
    if values and max(values) - min(values) <= resolve_tol(None):
        logger.debug("detection probability of %r conditioned on a null event; using the common value", prop)
        return values[0]
    raise UndefinedDetectionError(f"{prop!r} has zero quantum probability in this state")


def bayes_weights(m, prop, model):
    """
    Posterior component weights p_j p^d_j(F) / p^d_M(F) given detection

    Parameters:
    - m: ProperMixture
    - prop: Property without a0
    - model: DetectionModel

    Returns:
    - tuple of floats summing to 1, one per component
    """
    joint = [
        c.weight * detect_prob_property(model.for_component(c.device_id), c.state, prop)
        for c in m.components
    ]
    total = sum(joint)
    if total <= resolve_tol(None):
        raise ZeroTotalDetectionError(f"{prop!r} is never detected on this mixture")
    return tuple(value / total for value in joint)
