import math

import numpy as np

from utils.detection import ComponentDetection, ConstantDetection, PerEigenvalueDetection
from utils.linalg import StateVector
from utils.observables import GeneralizedObservable, OutcomeSet, Property
from utils.states import PureState, make_improper_from_composite, make_proper_mixture


def generate_spin_config(p_plus=0.6, d_plus=0.9, d_minus=0.8, theta=math.pi / 3, phi=0.0):
    """
    Built-in experiment: proper mixture of spin up and spin down along z,
    measured along the direction n(theta, phi)

    Parameters:
    - p_plus: Weight of the spin-up component
    - d_plus: Detection probability of the spin-up component
    - d_minus: Detection probability of the spin-down component
    - theta, phi: Polar angles of n in radians

    Returns:
    - Experiment config document (dict) in the JSON schema
    """
    entries = []
    for component, probability in ((0, d_plus), (1, d_minus)):
        for eigenvalue in (-1.0, 1.0):
            entries.append({
                "state": "M",
                "component": component,
                "observable": "sigma_n",
                "eigenvalue": eigenvalue,
                "probability": probability,
            })

    return {
        "observables": {
            "sigma_n": {"spin": {"theta": theta, "phi": phi}},
        },
        "states": {
            "S_plus": {"kind": "pure", "vector": [1, 0]},
            "S_minus": {"kind": "pure", "vector": [0, 1]},
            "M": {
                "kind": "proper",
                "components": [
                    {"state": "S_plus", "weight": p_plus},
                    {"state": "S_minus", "weight": 1.0 - p_plus},
                ],
            },
        },
        "detection": {"default": None, "entries": entries},
        "property": {"observable": "sigma_n", "outcomes": [1], "includes_a0": False},
        "target_state": "M",
        "sweep": {"parameter": "theta", "start": 0.0, "end": math.pi, "steps": 25},
        "monte_carlo": {"n": 100000, "seed": 42, "z": 3.0, "shards": 1},
        "output": {"format": "csv", "path": None},
    }


def generate_singlet_config():
    """Built-in composite experiment: first particle of a singlet pair"""
    amplitude = 1 / math.sqrt(2)
    return {
        "observables": {"sigma_n": {"spin": {"theta": math.pi / 3, "phi": 0.0}}},
        "states": {
            "N": {"kind": "composite", "vector": [0, amplitude, -amplitude, 0], "dims": [2, 2]},
        },
        "detection": {"default": 0.85, "entries": []},
        "property": {"observable": "sigma_n", "outcomes": [1], "includes_a0": False},
        "target_state": "N",
        "sweep": {"parameter": "theta", "start": 0.0, "end": math.pi, "steps": 13},
        "monte_carlo": {"n": 100000, "seed": 7, "z": 3.0, "shards": 1},
        "output": {"format": "csv", "path": None},
    }


# Random instances used by property tests and by the validate command

def random_hermitian(rng, dim):
    """Dense Hermitian matrix with Gaussian entries"""
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (raw + raw.conj().T) / 2


def random_observable(rng, dim, name="A"):
    return GeneralizedObservable.from_operator(name, random_hermitian(rng, dim))


def random_state_vector(rng, dim):
    return StateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_pure_state(rng, dim, label="psi"):
    return PureState(random_state_vector(rng, dim), label)


def random_proper_mixture(rng, dim, n_components=None):
    """Mixture of random pure states with Dirichlet weights"""
    if n_components is None:
        n_components = int(rng.integers(1, 4))
    weights = rng.dirichlet(np.ones(n_components))
    # keep every weight comfortably above the minimum component weight
    weights = (weights + 0.01) / (weights + 0.01).sum()
    return make_proper_mixture([
        (random_pure_state(rng, dim, f"psi{j}"), float(w)) for j, w in enumerate(weights)
    ])


def random_improper_mixture(rng, dim_first, dim_second=2):
    psi = random_state_vector(rng, dim_first * dim_second)
    return make_improper_from_composite(psi, dim_first, dim_second)


def random_outcome_set(rng, obs, allow_a0=False):
    mask = rng.random(len(obs.eigenvalues)) < 0.5
    values = frozenset(v for v, keep in zip(obs.eigenvalues, mask) if keep)
    includes_a0 = bool(allow_a0 and rng.random() < 0.5)
    if not values and not includes_a0:
        values = frozenset({obs.eigenvalues[int(rng.integers(len(obs.eigenvalues)))]})
    return OutcomeSet(values, includes_a0)


def random_property(rng, obs, allow_a0=False):
    return Property(obs, random_outcome_set(rng, obs, allow_a0))


def random_detection_table(rng, obs, low=0.05):
    """PerEigenvalueDetection with entries drawn from [low, 1]"""
    table = {(obs.name, value): float(rng.uniform(low, 1.0)) for value in obs.eigenvalues}
    return PerEigenvalueDetection(table)


def random_component_detection(rng, obs, mixture, low=0.05):
    models = {c.device_id: random_detection_table(rng, obs, low) for c in mixture.components}
    return ComponentDetection(models, ConstantDetection(float(rng.uniform(low, 1.0))))
