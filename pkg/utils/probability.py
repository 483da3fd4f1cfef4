"""
Analytic probabilities for the three state kinds: conditional (given
detection), overall (unconditional) and the standard QM baseline.
"""

from __future__ import annotations

import logging

from utils.detection import VectorRepr, state_repr_of
from utils.errors import DimensionMismatchError, InvalidStateError, NoRegistrationOutcomeError
from utils.linalg import (
    ComplexOperator,
    checked_probability,
    lift_first,
    partial_trace_second,
    trace_product,
)
from utils.observables import effect, projector
from utils.states import (
    DensityRepr,
    ImproperMixture,
    ProperMixture,
    PureState,
    esr_representation,
)

logger = logging.getLogger(__name__)


def _require_F_class(prop, what):
    if not prop.in_F_class:
        raise NoRegistrationOutcomeError(f"{what} is undefined for outcome sets containing a0")


def qm_density(state):
    """
    Density operator standard QM assigns to a state

    Returns:
    - |psi><psi| for a pure state, sum_j p_j rho_j for a proper mixture,
      rho_N for an improper mixture
    """
    if isinstance(state, PureState):
        return state.density()
    if isinstance(state, ProperMixture):
        return state.qm_density()
    if isinstance(state, ImproperMixture):
        return state.rho
    raise InvalidStateError(f"unsupported state type {type(state).__name__}")


def conditional_prob(state, prop, model):
    """
    Probability p_S(F) that F is displayed given that the object is detected

    Parameters:
    - state: PureState, ProperMixture or ImproperMixture
    - prop: Property without a0
    - model: DetectionModel (only proper mixtures depend on it)

    Returns:
    - float in [0, 1]
    """
    _require_F_class(prop, "the conditional probability")
    p_x = projector(prop.observable, prop.outcomes)

    if isinstance(state, ProperMixture):
        rho = esr_representation(state, prop, model).rho_of_F
    else:
        rho = state_repr_of(state).density()
    return checked_probability(trace_product(rho, p_x), "conditional probability")


def overall_prob(state, prop, model):
    """
    Probability p^t_S(F) that F is displayed when it is measured, detection
    included. Outcome sets containing a0 are allowed.

    Parameters:
    - state: PureState, ProperMixture or ImproperMixture
    - prop: Property
    - model: DetectionModel

    Returns:
    - float in [0, 1]
    """
    obs, outcomes = prop.observable, prop.outcomes

    if isinstance(state, ProperMixture):
        total = 0.0
        for component in state.components:
            component_model = model.for_component(component.device_id)
            t_x = effect(obs, outcomes, component_model, VectorRepr(component.state.vector))
            total += component.weight * trace_product(component.state.density(), t_x).real
        return checked_probability(total, "overall probability")

    state_repr = state_repr_of(state)
    t_x = effect(obs, outcomes, model, state_repr)
    return checked_probability(trace_product(state_repr.density(), t_x), "overall probability")


def quantum_prob(state, prop):
    """Standard QM prediction Tr[rho P(X)], detection ignored"""
    _require_F_class(prop, "the quantum probability")
    p_x = projector(prop.observable, prop.outcomes)
    return checked_probability(trace_product(qm_density(state), p_x), "quantum probability")


def overall_prob_from_representation(m, prop, model):
    """p^t_M(F) = Tr[p^d_M(F) rho_M(F) P(X)], through the family of pairs"""
    _require_F_class(prop, "the representation path")
    pair = esr_representation(m, prop, model)
    p_x = projector(prop.observable, prop.outcomes)
    return checked_probability(pair.pd_of_F * trace_product(pair.rho_of_F, p_x), "overall probability")


def composite_conditional_prob(psi, dim_first, dim_second, prop):
    """
    Tr[rho_Psi (P(X) (x) I_G)] for a property of the first subsystem,
    evaluated on the composite space
    """
    _require_F_class(prop, "the conditional probability")
    lifted = lift_first(projector(prop.observable, prop.outcomes), dim_second)
    if psi.dim != dim_first * dim_second:
        raise DimensionMismatchError(f"composite vector of dimension {psi.dim} does not factor as {dim_first} x {dim_second}")
    return checked_probability(trace_product(psi.projector(), lifted), "composite conditional probability")


def composite_overall_prob(psi, dim_first, dim_second, prop, model):
    """
    Tr[rho_Psi (T(X) (x) I_G)], the detection model being queried with the
    reduced density operator of the first subsystem
    """
    rho_psi = psi.projector()
    rho_n = partial_trace_second(rho_psi, dim_first, dim_second)
    rho_n = ComplexOperator((rho_n.matrix + rho_n.matrix.conj().T) / 2)
    t_x = effect(prop.observable, prop.outcomes, model, DensityRepr(rho_n))
    lifted = lift_first(t_x, dim_second)
    return checked_probability(trace_product(rho_psi, lifted), "composite overall probability")
