import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from data.sample_data import (
    random_component_detection,
    random_observable,
    random_proper_mixture,
    random_property,
)
from tests.conftest import SINGLET
from utils.errors import (
    DimensionMismatchError,
    InvalidStateError,
    NoRegistrationOutcomeError,
)
from utils.states import (
    MixtureComponent,
    basis_state,
    esr_density_from_traces,
    esr_representation,
    make_improper,
    make_improper_from_composite,
    make_proper_mixture,
    make_pure,
    spin_down_state,
    spin_up_state,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_make_pure_normalizes():
    state = make_pure([3, 4j], "psi")
    assert np.linalg.norm(state.vector.amplitudes) == pytest.approx(1.0)
    with pytest.raises(InvalidStateError):
        make_pure([0, 0])


def test_spin_states_are_orthogonal():
    up, down = spin_up_state(0.7, 1.1), spin_down_state(0.7, 1.1)
    assert abs(up.vector.inner(down.vector)) < 1e-12


@pytest.mark.parametrize(
    "components, error",
    [
        ([], InvalidStateError),
        ([(basis_state(2, 0), 0.5), (basis_state(2, 1), 0.4)], InvalidStateError),
        ([(basis_state(2, 0), 0.0), (basis_state(2, 1), 1.0)], InvalidStateError),
        ([(basis_state(2, 0), 0.5), (basis_state(3, 1), 0.5)], DimensionMismatchError),
        ([(basis_state(2, 0), 0.5, 1), (basis_state(2, 1), 0.5, 1)], InvalidStateError),
    ],
)
def test_proper_mixture_validation(components, error):
    with pytest.raises(error):
        make_proper_mixture(components)


def test_nested_mixtures_are_rejected():
    inner = make_proper_mixture([(basis_state(2, 0), 0.5), (basis_state(2, 1), 0.5)])
    with pytest.raises(InvalidStateError):
        make_proper_mixture([(inner, 1.0)])


def test_operational_equality_keeps_the_recipe():
    """Two recipes with the same QM density operator are different proper mixtures"""
    z_mix = make_proper_mixture([(basis_state(2, 0), 0.5), (basis_state(2, 1), 0.5)])
    x_mix = make_proper_mixture([(spin_up_state(np.pi / 2), 0.5), (spin_down_state(np.pi / 2), 0.5)])
    np.testing.assert_allclose(z_mix.qm_density().matrix, x_mix.qm_density().matrix, atol=1e-12)
    assert z_mix != x_mix
    assert z_mix == make_proper_mixture([(basis_state(2, 0), 0.5), (basis_state(2, 1), 0.5)])


def test_device_ids_default_to_position():
    m = make_proper_mixture([(basis_state(2, 0), 0.5), MixtureComponent(basis_state(2, 1), 0.5, 7)])
    assert [c.device_id for c in m.components] == [0, 7]


def test_singlet_reduces_to_maximally_mixed(singlet):
    np.testing.assert_allclose(singlet.rho.matrix, np.eye(2) / 2, atol=1e-12)
    assert not singlet.is_pure
    assert singlet.provenance.dim_first == 2


def test_product_state_reduces_to_pure_state():
    psi = np.kron(spin_up_state(0.4).vector.amplitudes, [1, 0])
    reduced = make_improper_from_composite(psi, 2, 2)
    assert reduced.is_pure
    assert reduced.pure_vector().same_ray(spin_up_state(0.4).vector)


def test_composite_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        make_improper_from_composite(SINGLET, 3, 2)


def test_improper_needs_density_operator():
    with pytest.raises(InvalidStateError):
        make_improper([[1, 0], [0, 1]])


def test_representation_of_spin_mixture(spin_mix, spin_model, spin_prop):
    pair = esr_representation(spin_mix, spin_prop, spin_model)
    assert pair.pd_of_F == pytest.approx(0.86, abs=1e-12)
    np.testing.assert_allclose(pair.rho_of_F.matrix, np.diag([0.54, 0.32]) / 0.86, atol=1e-12)


def test_representation_needs_F_class(spin_mix, spin_model, spin_prop):
    with pytest.raises(NoRegistrationOutcomeError):
        esr_representation(spin_mix, spin_prop.complement(), spin_model)


@given(seed=seeds, dim=st.integers(min_value=2, max_value=4))
@settings(max_examples=60, deadline=None)
def test_trace_quotient_form_matches_bayes_form(seed, dim):
    rng = np.random.default_rng(seed)
    obs = random_observable(rng, dim)
    m = random_proper_mixture(rng, dim)
    model = random_component_detection(rng, obs, m, low=0.2)
    prop = random_property(rng, obs)

    from_weights = esr_representation(m, prop, model).rho_of_F
    from_traces = esr_density_from_traces(m, prop, model)
    assert from_weights.distance(from_traces) <= 1e-12
    assert from_weights.is_density(1e-10)
