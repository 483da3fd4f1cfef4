import math

import numpy as np
import pytest

from components.spin_scenario import spin_detection, spin_mixture, spin_property
from utils.observables import pauli_observable
from utils.states import make_improper_from_composite

SINGLET = np.array([0, 1, -1, 0]) / math.sqrt(2)


@pytest.fixture
def sigma_z():
    return pauli_observable("z")


@pytest.fixture
def sigma_x():
    return pauli_observable("x")


@pytest.fixture
def spin_mix():
    """M = {(S+, 0.6), (S-, 0.4)}"""
    return spin_mixture(0.6)


@pytest.fixture
def spin_model():
    return spin_detection(0.9, 0.8)


@pytest.fixture
def spin_prop():
    return spin_property(math.pi / 3)


@pytest.fixture
def singlet():
    return make_improper_from_composite(SINGLET, 2, 2, "N")

