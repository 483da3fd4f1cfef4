"""
Nondestructive idealized measurements: outcome sampling and the state
transformations for pure states, proper mixtures and improper mixtures.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from utils.config import resolve_tol
from utils.errors import InvalidStateError, ZeroProbabilityOutcomeError
from utils.linalg import ComplexOperator, StateVector, checked_probability
from utils.observables import effect
from utils.probability import overall_prob
from utils.states import (
    DensityRepr,
    ImproperMixture,
    MixtureComponent,
    ProperMixture,
    PureState,
    VectorRepr,
    make_proper_mixture,
)

logger = logging.getLogger(__name__)


class Outcome(str, Enum):
    YES = "yes"
    NO = "no"


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    property: object
    outcome: Outcome
    pre_state: object
    post_state: object
    probability_of_outcome: float


def _selected_property(prop, outcome):
    # the no outcome is the yes outcome of the complementary property
    return prop if Outcome(outcome) is Outcome.YES else prop.complement()


def _same_model(a, b):
    return a is b or a == b


def gpp_update(s, prop, outcome, model):
    """
    Post-measurement pure state: T(X)|psi> normalized, with T(X) the effect of
    the realized outcome evaluated at the pre-measurement state

    Parameters:
    - s: PureState
    - prop: Property that was measured
    - outcome: Outcome.YES or Outcome.NO (or "yes" / "no")
    - model: DetectionModel

    Returns:
    - PureState with canonical global phase
    """
    selected = _selected_property(prop, outcome)
    t_x = effect(selected.observable, selected.outcomes, model, VectorRepr(s.vector))
    probability = s.vector.expectation(t_x).real
    if probability <= resolve_tol(None):
        raise ZeroProbabilityOutcomeError(f"outcome {Outcome(outcome).value!r} of {prop!r} cannot occur in this state")
    image = StateVector.normalized(t_x.apply(s.vector))
    return PureState(image.with_canonical_phase(), s.label)


def glp_update(m, prop, outcome, model):
    """
    Post-measurement proper mixture: every component is updated as a pure
    state and reweighted by Bayes' rule with its overall probability

    Parameters:
    - m: ProperMixture
    - prop: Property that was measured
    - outcome: Outcome.YES or Outcome.NO
    - model: DetectionModel

    Returns:
    - ProperMixture. Components that cannot produce the outcome are dropped;
      components whose updated states coincide and whose detection models
      are equal are merged.
    """
    tol = resolve_tol(None)
    selected = _selected_property(prop, outcome)

    joint = []
    for component in m.components:
        component_model = model.for_component(component.device_id)
        joint.append(component.weight * overall_prob(component.state, selected, component_model))
    total = sum(joint)
    if total <= tol:
        raise ZeroProbabilityOutcomeError(f"outcome {Outcome(outcome).value!r} of {prop!r} cannot occur in this mixture")

    merged = []
    for component, weight in zip(m.components, joint):
        if weight / component.weight <= tol:
            logger.debug("dropping component %d: outcome impossible for it", component.device_id)
            continue
        component_model = model.for_component(component.device_id)
        post = gpp_update(component.state, selected, Outcome.YES, component_model)
        for k, (state, acc, device_id) in enumerate(merged):
            # a merged component answers later measurements with a single model
            if not _same_model(model.for_component(device_id), component_model):
                continue
            if state.vector.allclose(post.vector, tol=max(tol, 1e-9)):
                logger.debug("merging component %d into component %d", component.device_id, device_id)
                merged[k] = (state, acc + weight, device_id)
                break
        else:
            merged.append((post, weight, component.device_id))

    kept = sum(weight for _, weight, _ in merged)
    return make_proper_mixture(
        [MixtureComponent(state, weight / kept, device_id) for state, weight, device_id in merged]
    )


def improper_update(n, prop, outcome, model):
    """
    Post-measurement improper mixture T rho_N T / Tr[T rho_N T]; the result
    is no longer tied to the composite vector rho_N came from
    """
    selected = _selected_property(prop, outcome)
    t_x = effect(selected.observable, selected.outcomes, model, DensityRepr(n.rho))
    probability = (n.rho @ t_x).trace().real
    sandwich = (t_x @ n.rho @ t_x).matrix
    norm = float(sandwich.trace().real)
    if probability <= resolve_tol(None) or norm <= resolve_tol(None):
        raise ZeroProbabilityOutcomeError(f"outcome {Outcome(outcome).value!r} of {prop!r} cannot occur in this state")
    rho = sandwich / norm
    return ImproperMixture(ComplexOperator((rho + rho.conj().T) / 2), None, n.label)


def update_state(state, prop, outcome, model):
    """Dispatch to the update rule matching the state kind"""
    if isinstance(state, PureState):
        return gpp_update(state, prop, outcome, model)
    if isinstance(state, ProperMixture):
        return glp_update(state, prop, outcome, model)
    if isinstance(state, ImproperMixture):
        return improper_update(state, prop, outcome, model)
    raise InvalidStateError(f"unsupported state type {type(state).__name__}")


def measure(state, prop, model, rng):
    """
    Measure prop once on state

    Parameters:
    - state: Any state kind
    - prop: Property
    - model: DetectionModel
    - rng: numpy.random.Generator supplied by the caller

    Returns:
    - MeasurementRecord with the realized outcome and the updated state
    """
    p_yes = overall_prob(state, prop, model)
    outcome = Outcome.YES if rng.random() < p_yes else Outcome.NO
    probability = p_yes if outcome is Outcome.YES else checked_probability(1.0 - p_yes)
    post_state = update_state(state, prop, outcome, model)
    return MeasurementRecord(prop, outcome, state, post_state, probability)
