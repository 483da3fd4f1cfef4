import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from data.sample_data import (
    random_component_detection,
    random_detection_table,
    random_observable,
    random_proper_mixture,
    random_property,
    random_pure_state,
)
from utils.detection import ComponentDetection, ConstantDetection, IdealDetection, PerEigenvalueDetection
from utils.errors import ZeroProbabilityOutcomeError
from utils.linalg import StateVector
from utils.measurement import Outcome, glp_update, gpp_update, improper_update, measure, update_state
from utils.observables import Property, projector
from utils.probability import conditional_prob, overall_prob
from utils.states import (
    ImproperMixture,
    MixtureComponent,
    ProperMixture,
    basis_state,
    esr_representation,
    make_improper,
    make_proper_mixture,
    spin_up_state,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _lueders(state, prop):
    p_x = projector(prop.observable, prop.outcomes)
    return StateVector.normalized(p_x.apply(state.vector)).with_canonical_phase()


@given(seed=seeds, dim=st.integers(min_value=1, max_value=4))
@settings(max_examples=100, deadline=None)
def test_ideal_gpp_is_lueders_update(seed, dim):
    rng = np.random.default_rng(seed)
    obs = random_observable(rng, dim)
    state = random_pure_state(rng, dim)
    prop = random_property(rng, obs)
    updated = gpp_update(state, prop, Outcome.YES, IdealDetection())
    np.testing.assert_allclose(updated.vector.amplitudes, _lueders(state, prop).amplitudes, atol=1e-10)


@given(seed=seeds, dim=st.integers(min_value=1, max_value=4))
@settings(max_examples=100, deadline=None)
def test_yes_outcome_is_repeatable(seed, dim):
    rng = np.random.default_rng(seed)
    obs = random_observable(rng, dim)
    state = random_pure_state(rng, dim)
    model = random_detection_table(rng, obs, low=0.1)
    prop = random_property(rng, obs)
    updated = gpp_update(state, prop, Outcome.YES, model)
    assert conditional_prob(updated, prop, model) == pytest.approx(1.0, abs=1e-10)


@given(seed=seeds, dim=st.integers(min_value=2, max_value=4))
@settings(max_examples=60, deadline=None)
def test_single_component_glp_is_gpp(seed, dim):
    rng = np.random.default_rng(seed)
    obs = random_observable(rng, dim)
    state = random_pure_state(rng, dim)
    model = random_detection_table(rng, obs, low=0.1)
    prop = random_property(rng, obs)
    mixture = make_proper_mixture([(state, 1.0)])
    via_glp = glp_update(mixture, prop, Outcome.YES, model)
    via_gpp = gpp_update(state, prop, Outcome.YES, model)
    assert len(via_glp.components) == 1
    np.testing.assert_allclose(via_glp.components[0].state.vector.amplitudes, via_gpp.vector.amplitudes, atol=1e-12)
    assert via_glp.components[0].weight == pytest.approx(1.0, abs=1e-12)


@given(seed=seeds, dim=st.integers(min_value=2, max_value=4), outcome=st.sampled_from(list(Outcome)))
@settings(max_examples=100, deadline=None)
def test_glp_weights_sum_to_one(seed, dim, outcome):
    rng = np.random.default_rng(seed)
    obs = random_observable(rng, dim)
    m = random_proper_mixture(rng, dim)
    model = random_component_detection(rng, obs, m, low=0.1)
    prop = random_property(rng, obs)
    updated = glp_update(m, prop, outcome, model)
    assert sum(updated.weights) == pytest.approx(1.0, abs=1e-12)
    # device ids survive the update
    assert {c.device_id for c in updated.components} <= {c.device_id for c in m.components}


def test_glp_reweights_by_overall_probability(spin_mix, spin_model, spin_prop):
    updated = glp_update(spin_mix, spin_prop, Outcome.YES, spin_model)
    # both collapse onto |+n> but keep their own detection models
    assert [c.device_id for c in updated.components] == [0, 1]
    for component in updated.components:
        assert component.state.vector.same_ray(spin_up_state(math.pi / 3).vector)
    assert updated.weights == pytest.approx((0.405 / 0.485, 0.08 / 0.485), abs=1e-12)


def test_second_measurement_uses_each_component_model(spin_mix, spin_model, spin_prop):
    updated = glp_update(spin_mix, spin_prop, Outcome.YES, spin_model)
    expected = (0.405 * 0.9 + 0.08 * 0.8) / 0.485
    assert overall_prob(updated, spin_prop, spin_model) == pytest.approx(expected, abs=1e-12)
    assert overall_prob(updated, spin_prop, spin_model) == pytest.approx(0.8835051546391752, abs=1e-12)


@pytest.mark.parametrize(
    "model",
    [
        ConstantDetection(0.7),
        ComponentDetection({0: ConstantDetection(0.7), 1: ConstantDetection(0.7)}),
        ComponentDetection({
            0: PerEigenvalueDetection({("sigma_z", 1.0): 0.7, ("sigma_z", -1.0): 0.4}),
            1: PerEigenvalueDetection({("sigma_z", 1.0): 0.7, ("sigma_z", -1.0): 0.4}),
        }),
    ],
)
def test_glp_merges_coinciding_components_with_equal_models(sigma_z, model):
    m = make_proper_mixture([(spin_up_state(math.pi / 2), 0.5), (spin_up_state(-math.pi / 2), 0.5)])
    prop = Property(sigma_z, sigma_z.outcomes([1.0]))
    updated = glp_update(m, prop, Outcome.YES, model)
    assert len(updated.components) == 1
    assert updated.components[0].device_id == 0
    assert updated.components[0].state.vector.same_ray(basis_state(2, 0).vector)
    assert updated.weights == pytest.approx((1.0,), abs=1e-12)


def test_glp_keeps_distinct_components(sigma_z):
    a, b = spin_up_state(0.5), spin_up_state(2.0)
    m = make_proper_mixture([(a, 0.3), (b, 0.7)])
    prop = Property(sigma_z, sigma_z.outcomes([1.0, -1.0]))
    model = ComponentDetection({
        0: PerEigenvalueDetection({("sigma_z", 1.0): 0.9, ("sigma_z", -1.0): 0.3}),
        1: ConstantDetection(0.5),
    })
    updated = glp_update(m, prop, Outcome.YES, model)
    joint = [0.3 * overall_prob(a, prop, model.for_component(0)), 0.7 * overall_prob(b, prop, model.for_component(1))]
    assert updated.weights == pytest.approx(tuple(w / sum(joint) for w in joint), abs=1e-12)
    assert [c.device_id for c in updated.components] == [0, 1]


def test_glp_drops_components_that_cannot_respond(sigma_z):
    m = make_proper_mixture([(basis_state(2, 0), 0.5), (basis_state(2, 1), 0.5)])
    prop = Property(sigma_z, sigma_z.outcomes([1.0]))
    updated = glp_update(m, prop, Outcome.YES, IdealDetection())
    assert len(updated.components) == 1
    assert updated.components[0].device_id == 0


def test_glp_posterior_representation(spin_mix, spin_model, spin_prop):
    updated = glp_update(spin_mix, spin_prop, Outcome.YES, spin_model)
    pair = esr_representation(updated, spin_prop, spin_model)
    assert np.trace(pair.rho_of_F.matrix @ projector(spin_prop.observable, spin_prop.outcomes).matrix).real == pytest.approx(1.0, abs=1e-12)


def test_no_outcome_uses_complement(sigma_z):
    state = spin_up_state(math.pi / 2)
    prop = Property(sigma_z, sigma_z.outcomes([1.0]))
    model = PerEigenvalueDetection({("sigma_z", 1.0): 0.5, ("sigma_z", -1.0): 1.0})
    updated = gpp_update(state, prop, Outcome.NO, model)
    # T(X^c) = I - d(+1) P+ = 0.5 P+ + P-
    expected = StateVector.normalized([0.5, 1.0])
    np.testing.assert_allclose(updated.vector.amplitudes, expected.amplitudes, atol=1e-12)


def test_impossible_outcome_raises(sigma_z):
    with pytest.raises(ZeroProbabilityOutcomeError):
        gpp_update(basis_state(2, 1), Property(sigma_z, sigma_z.outcomes([1.0])), Outcome.YES, IdealDetection())
    with pytest.raises(ZeroProbabilityOutcomeError):
        glp_update(
            make_proper_mixture([(basis_state(2, 1), 1.0)]),
            Property(sigma_z, sigma_z.outcomes([1.0])),
            "yes",
            IdealDetection(),
        )


def test_improper_update_forgets_provenance(singlet, sigma_z):
    prop = Property(sigma_z, sigma_z.outcomes([1.0]))
    updated = improper_update(singlet, prop, Outcome.YES, ConstantDetection(0.8))
    assert isinstance(updated, ImproperMixture)
    assert updated.provenance is None
    np.testing.assert_allclose(updated.rho.matrix, np.diag([1.0, 0.0]), atol=1e-12)


def test_update_state_dispatch(spin_mix, spin_model, spin_prop, singlet):
    assert isinstance(update_state(spin_mix, spin_prop, Outcome.YES, spin_model), ProperMixture)
    assert isinstance(update_state(singlet, spin_prop, Outcome.NO, ConstantDetection(0.5)), ImproperMixture)


def test_measure_uses_callers_generator(spin_mix, spin_model, spin_prop):
    first = measure(spin_mix, spin_prop, spin_model, np.random.default_rng(11))
    second = measure(spin_mix, spin_prop, spin_model, np.random.default_rng(11))
    assert first.outcome is second.outcome
    expected = 0.485 if first.outcome is Outcome.YES else 0.515
    assert first.probability_of_outcome == pytest.approx(expected, abs=1e-12)
    assert first.pre_state is spin_mix


def test_mixture_component_weights_are_kept_in_order():
    m = make_proper_mixture([MixtureComponent(basis_state(2, 0), 0.25, 3), MixtureComponent(basis_state(2, 1), 0.75, 1)])
    assert [c.device_id for c in m.components] == [3, 1]


@given(seed=seeds, dim=st.integers(min_value=1, max_value=4), outcome=st.sampled_from(list(Outcome)))
@settings(max_examples=100, deadline=None)
def test_rank_one_improper_update_matches_gpp(seed, dim, outcome):
    rng = np.random.default_rng(seed)
    obs = random_observable(rng, dim)
    state = random_pure_state(rng, dim)
    model = random_detection_table(rng, obs, low=0.1)
    prop = random_property(rng, obs)
    try:
        via_vector = gpp_update(state, prop, outcome, model)
    except ZeroProbabilityOutcomeError:
        return
    via_density = improper_update(make_improper(state.density()), prop, outcome, model)
    np.testing.assert_allclose(via_density.rho.matrix, via_vector.density().matrix, atol=1e-10)


def test_improper_no_outcome_keeps_the_other_eigenvalue(sigma_z):
    mixed = make_improper(np.diag([0.8, 0.2]))
    prop = Property(sigma_z, sigma_z.outcomes([-1.0], includes_a0=True))
    model = PerEigenvalueDetection({("sigma_z", 1.0): 0.9, ("sigma_z", -1.0): 0.6})
    updated = improper_update(mixed, prop, Outcome.NO, model)
    np.testing.assert_allclose(updated.rho.matrix, np.diag([1.0, 0.0]), atol=1e-12)


def test_improper_yes_outcome_from_maximal_mixture(sigma_z):
    updated = improper_update(
        make_improper(np.eye(2) / 2),
        Property(sigma_z, sigma_z.outcomes([1.0])),
        Outcome.YES,
        PerEigenvalueDetection({("sigma_z", 1.0): 0.9, ("sigma_z", -1.0): 0.5}),
    )
    np.testing.assert_allclose(updated.rho.matrix, np.diag([1.0, 0.0]), atol=1e-12)
