"""
Spin-1/2 proper mixture of |+> and |-> along z, with component-dependent
detection, measured along a direction n(theta, phi).
"""

import logging
import math

from utils.config import MIN_COMPONENT_WEIGHT, PROBABILITY_SLACK
from utils.detection import ComponentDetection, ConstantDetection, detect_prob_property
from utils.errors import NumericalIntegrityError, ParameterRangeError
from utils.export import ResultRow
from utils.observables import Property, spin_observable
from utils.probability import conditional_prob, overall_prob, quantum_prob
from utils.states import MixtureComponent, basis_state, make_proper_mixture

logger = logging.getLogger(__name__)

SPIN_UP_ID = 0
SPIN_DOWN_ID = 1


def _check_unit(value, name):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and 0.0 <= value <= 1.0):
        raise ParameterRangeError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def _check_angle(value, name):
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise ParameterRangeError(f"{name} must be a finite angle in radians, got {value!r}")
    return float(value)


def spin_mixture(p_plus):
    """M = {(S+, p+), (S-, 1 - p+)}; a zero-weight component is left out"""
    p_plus = _check_unit(p_plus, "p_plus")
    components = [
        MixtureComponent(basis_state(2, 0, "S+"), p_plus, SPIN_UP_ID),
        MixtureComponent(basis_state(2, 1, "S-"), 1.0 - p_plus, SPIN_DOWN_ID),
    ]
    return make_proper_mixture([c for c in components if c.weight >= MIN_COMPONENT_WEIGHT])


def spin_detection(d_plus, d_minus):
    """Detection probability fixed per component, the same for every outcome"""
    return ComponentDetection({
        SPIN_UP_ID: ConstantDetection(_check_unit(d_plus, "d_plus")),
        SPIN_DOWN_ID: ConstantDetection(_check_unit(d_minus, "d_minus")),
    })


def spin_property(theta, phi=0.0):
    """F_n = (sigma_n, {+1})"""
    obs = spin_observable(_check_angle(theta, "theta"), _check_angle(phi, "phi"))
    return Property(obs, obs.outcomes([1.0]))


def _cross_check(label, computed, expected):
    if abs(computed - expected) > PROBABILITY_SLACK:
        raise NumericalIntegrityError(f"{label}: engine gives {computed!r}, closed form gives {expected!r}")


def spin_scenario(p_plus, d_plus, d_minus, theta, phi=0.0):
    """
    Conditional, overall and quantum probability of spin up along n

    Parameters:
    - p_plus: Weight of |+> in the mixture
    - d_plus, d_minus: Detection probabilities of the two components
    - theta, phi: Direction n in radians

    Returns:
    - ResultRow with sweep_value = theta and no Monte Carlo columns
    """
    mixture = spin_mixture(p_plus)
    model = spin_detection(d_plus, d_minus)
    prop = spin_property(theta, phi)

    p_conditional = conditional_prob(mixture, prop, model)
    p_overall = overall_prob(mixture, prop, model)
    p_quantum = quantum_prob(mixture, prop)
    p_detect = detect_prob_property(model, mixture, prop)

    c = math.cos(theta / 2) ** 2
    p_minus = 1.0 - p_plus
    _cross_check("quantum probability", p_quantum, p_plus * c + p_minus * (1 - c))
    _cross_check("overall probability", p_overall, p_plus * d_plus * c + p_minus * d_minus * (1 - c))
    _cross_check("detection probability", p_detect, p_plus * d_plus + p_minus * d_minus)
    _cross_check("conditional probability", p_conditional, p_overall / p_detect)

    return ResultRow(float(theta), p_conditional, p_overall, p_quantum, p_detect)
