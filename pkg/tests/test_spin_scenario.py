import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from components.spin_scenario import spin_scenario
from utils.errors import ParameterRangeError, ZeroTotalDetectionError

THETA_GRID = np.linspace(0.0, math.pi, 100)


def closed_forms(p_plus, d_plus, d_minus, theta):
    c = math.cos(theta / 2) ** 2
    p_minus = 1 - p_plus
    overall = p_plus * d_plus * c + p_minus * d_minus * (1 - c)
    return overall / (p_plus * d_plus + p_minus * d_minus), overall, p_plus * c + p_minus * (1 - c)


def test_reference_point():
    row = spin_scenario(0.6, 0.9, 0.8, math.pi / 3)
    assert row.p_quantum == pytest.approx(0.55, abs=1e-12)
    assert row.p_overall == pytest.approx(0.485, abs=1e-12)
    assert row.p_conditional == pytest.approx(0.485 / 0.86, abs=1e-12)
    assert row.p_conditional == pytest.approx(0.56395, abs=1e-5)
    assert row.p_detect == pytest.approx(0.86, abs=1e-12)
    assert row.sweep_value == pytest.approx(math.pi / 3)
    assert row.mc_frequency is None


@pytest.mark.parametrize("theta", THETA_GRID)
def test_engine_matches_closed_forms_on_grid(theta):
    row = spin_scenario(0.6, 0.9, 0.8, theta)
    expected = closed_forms(0.6, 0.9, 0.8, theta)
    assert (row.p_conditional, row.p_overall, row.p_quantum) == pytest.approx(expected, abs=1e-12)


@given(
    p_plus=st.floats(min_value=0.0, max_value=1.0),
    d_plus=st.floats(min_value=0.05, max_value=1.0),
    d_minus=st.floats(min_value=0.05, max_value=1.0),
    theta=st.floats(min_value=0.0, max_value=2 * math.pi),
    phi=st.floats(min_value=0.0, max_value=2 * math.pi),
)
@settings(max_examples=150, deadline=None)
def test_closed_forms_hold_for_any_parameters(p_plus, d_plus, d_minus, theta, phi):
    row = spin_scenario(p_plus, d_plus, d_minus, theta, phi)
    expected = closed_forms(p_plus, d_plus, d_minus, theta)
    assert (row.p_conditional, row.p_overall, row.p_quantum) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("theta", np.linspace(0.0, math.pi, 11))
def test_perfect_detection_recovers_quantum_mechanics(theta):
    row = spin_scenario(0.3, 1.0, 1.0, theta)
    assert row.p_conditional == pytest.approx(row.p_quantum, abs=1e-12)
    assert row.p_overall == pytest.approx(row.p_quantum, abs=1e-12)


@pytest.mark.parametrize("theta", np.linspace(0.0, math.pi, 11))
def test_equal_detection_factors_out(theta):
    row = spin_scenario(0.6, 0.7, 0.7, theta)
    assert row.p_conditional == pytest.approx(row.p_quantum, abs=1e-12)
    assert row.p_overall == pytest.approx(0.7 * row.p_quantum, abs=1e-12)


def test_unequal_detection_diverges_from_quantum_mechanics():
    rows = [spin_scenario(0.6, 0.9, 0.8, theta) for theta in THETA_GRID]
    assert max(abs(r.p_conditional - r.p_quantum) for r in rows) > 1e-3
    assert max(abs(r.p_overall - r.p_quantum) for r in rows) > 1e-3


def test_conditional_equals_quantum_only_on_special_directions():
    # the gap is |0.2 cos^2(theta/2) - 0.1| and closes only at theta = pi/2
    rows = [spin_scenario(0.5, 0.9, 0.6, theta) for theta in THETA_GRID]
    gaps = [abs(r.p_conditional - r.p_quantum) for r in rows]
    assert min(gaps) < 1e-2
    assert max(gaps) > 1e-2


def test_pure_components_are_allowed():
    row = spin_scenario(1.0, 0.9, 0.8, math.pi / 2)
    assert row.p_quantum == pytest.approx(0.5, abs=1e-12)
    assert row.p_conditional == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize(
    "args",
    [(1.2, 0.9, 0.8, 0.0), (0.5, -0.1, 0.8, 0.0), (0.5, 0.9, 1.5, 0.0), (0.5, 0.9, 0.8, float("inf"))],
)
def test_parameter_ranges(args):
    with pytest.raises(ParameterRangeError):
        spin_scenario(*args)


def test_nothing_detected():
    with pytest.raises(ZeroTotalDetectionError):
        spin_scenario(0.5, 0.0, 0.0, 1.0)
