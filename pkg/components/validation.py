"""
Invariant suite run by the `validate` command on the objects of a config.
"""

import logging

import numpy as np
import pandas as pd

from data.data_manager import ExperimentManager
from utils.config import resolve_tol
from utils.detection import IdealDetection, detect_prob_property
from utils.errors import ConfigError, EsrError
from utils.linalg import StateVector
from utils.measurement import Outcome, glp_update, gpp_update
from utils.observables import Property, effect, projector
from utils.probability import (
    composite_conditional_prob,
    composite_overall_prob,
    conditional_prob,
    overall_prob,
    overall_prob_from_representation,
    quantum_prob,
)
from utils.states import (
    ImproperMixture,
    ProperMixture,
    PureState,
    VectorRepr,
    esr_density_from_traces,
    esr_representation,
    state_repr_of,
)

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["check", "state", "max_deviation", "tolerance", "passed"]


def _measured_reprs(state, model):
    """(state_repr, model) pairs an effect operator is built from"""
    if isinstance(state, ProperMixture):
        return [(VectorRepr(c.state.vector), model.for_component(c.device_id)) for c in state.components]
    return [(state_repr_of(state), model)]


def _check_complement(state, prop, model):
    total = overall_prob(state, prop, model) + overall_prob(state, prop.complement(), model)
    return abs(total - 1.0)


def _check_factorization(state, prop, model):
    product = detect_prob_property(model, state, prop) * conditional_prob(state, prop, model)
    return abs(overall_prob(state, prop, model) - product)


def _check_pov_structure(state, prop, model):
    obs = prop.observable
    identity = np.eye(obs.dim)
    deviation = 0.0
    for state_repr, component_model in _measured_reprs(state, model):
        t_x = effect(obs, prop.outcomes, component_model, state_repr).matrix
        t_c = effect(obs, prop.complement().outcomes, component_model, state_repr).matrix
        deviation = max(deviation, np.abs(t_x + t_c - identity).max())
        values = np.linalg.eigvalsh((t_x + t_x.conj().T) / 2)
        deviation = max(deviation, -values.min(), values.max() - 1.0)
    return float(max(deviation, 0.0))


def _check_commutation(state, prop, model):
    obs = prop.observable
    deviation = 0.0
    for state_repr, component_model in _measured_reprs(state, model):
        effects = [
            effect(obs, obs.outcomes([value]), component_model, state_repr).matrix
            for value in obs.eigenvalues
        ]
        for i, a in enumerate(effects):
            for b in effects[i + 1:]:
                deviation = max(deviation, np.abs(a @ b - b @ a).max())
    return float(deviation)


def _check_qm_reduction(state, prop, model):
    ideal = IdealDetection()
    values = [
        overall_prob(state, prop, ideal),
        conditional_prob(state, prop, ideal),
        quantum_prob(state, prop),
    ]
    return max(values) - min(values)


def _check_ideal_update(state, prop, model):
    p_x = projector(prop.observable, prop.outcomes)
    expected = StateVector.normalized(p_x.apply(state.vector)).with_canonical_phase()
    updated = gpp_update(state, prop, Outcome.YES, IdealDetection())
    return float(np.linalg.norm(updated.vector.amplitudes - expected.amplitudes))


def _check_repeatability(state, prop, model):
    updated = gpp_update(state, prop, Outcome.YES, model)
    return abs(conditional_prob(updated, prop, model) - 1.0)


def _check_representation(state, prop, model):
    from_weights = esr_representation(state, prop, model).rho_of_F
    from_traces = esr_density_from_traces(state, prop, model)
    overall_gap = abs(overall_prob(state, prop, model) - overall_prob_from_representation(state, prop, model))
    return max(from_weights.distance(from_traces), overall_gap)


def _check_glp_weights(state, prop, model):
    updated = glp_update(state, prop, Outcome.YES, model)
    return abs(sum(updated.weights) - 1.0)


def _check_composite(state, prop, model):
    source = state.provenance
    conditional_gap = abs(
        conditional_prob(state, prop, model)
        - composite_conditional_prob(source.psi, source.dim_first, source.dim_second, prop)
    )
    overall_gap = abs(
        overall_prob(state, prop, model)
        - composite_overall_prob(source.psi, source.dim_first, source.dim_second, prop, model)
    )
    return max(conditional_gap, overall_gap)


def _applicable_checks(state, prop, model):
    checks = [("qm_reduction", _check_qm_reduction, False)]
    if model is not None:
        checks += [
            ("complement", _check_complement, True),
            ("factorization", _check_factorization, True),
            ("pov_structure", _check_pov_structure, True),
            ("commutation", _check_commutation, True),
        ]
    if isinstance(state, PureState):
        checks.append(("ideal_update", _check_ideal_update, False))
        if model is not None:
            checks.append(("repeatability", _check_repeatability, True))
    if isinstance(state, ProperMixture) and model is not None:
        checks += [
            ("representation", _check_representation, True),
            ("glp_weights", _check_glp_weights, True),
        ]
    if isinstance(state, ImproperMixture) and state.provenance is not None and model is not None:
        checks.append(("composite", _check_composite, True))
    return checks


def run_invariant_suite(config, tol=None):
    """
    Check the model's identities on every configured state

    Parameters:
    - config: ExperimentConfig
    - tol: Allowed deviation per check (default: configured tolerance)

    Returns:
    - DataFrame with columns check, state, max_deviation, tolerance, passed.
      Checks whose quantities are undefined for a state (for instance a
      property the state never displays) are left out.
    """
    tol = resolve_tol(tol)
    if config.sweep is None:
        observables = [ExperimentManager.observable_at(config)]
    else:
        observables = [
            ExperimentManager.observable_at(config, config.sweep.parameter, value)
            for value in config.sweep.values()
        ]
    base = ExperimentManager.build_property(config, observables[0])
    # the F-class checks use the eigenvalue part of the configured outcome set
    properties = [Property(obs, obs.outcomes(base.outcomes.eigen_subset)) for obs in observables]

    results = {}
    for name, state in config.states.items():
        try:
            model = ExperimentManager.detection_model_for(config, name)
        except ConfigError:
            logger.debug("state %r has no detection model; running model-free checks only", name)
            model = None
        if state.dim != observables[0].dim:
            logger.debug("state %r does not live in the observable's space; skipped", name)
            continue

        for prop in properties:
            for check, function, needs_model in _applicable_checks(state, prop, model):
                try:
                    deviation = float(function(state, prop, model if needs_model else None))
                except EsrError as e:
                    logger.debug("%s on %r at %r not applicable: %s", check, name, prop, e)
                    continue
                key = (check, name)
                results[key] = max(results.get(key, 0.0), deviation)

    rows = [
        {"check": check, "state": name, "max_deviation": deviation, "tolerance": tol, "passed": deviation <= tol}
        for (check, name), deviation in results.items()
    ]
    report = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    failed = int((~report["passed"]).sum()) if len(report) else 0
    logger.debug("invariant suite: %d checks, %d failed", len(report), failed)
    return report
