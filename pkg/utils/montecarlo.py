"""
Ensemble sampling at the macroscopic level: prepare (pick a component for a
proper mixture), draw an eigenvalue with its quantum probability, then detect
it with the model's detection probability or register a0.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from utils.config import DEFAULT_Z
from utils.errors import InvalidStateError, NoRegistrationOutcomeError
from utils.linalg import trace_product
from utils.states import ProperMixture, state_repr_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComponentCount:
    index: int
    prepared: int
    detected: int


@dataclass(frozen=True)
class EnsembleReport:
    n_total: int
    n_detected: int
    n_yes: int
    yes_frequency: float
    per_component_detected: tuple
    confidence_halfwidth: float
    z: float = DEFAULT_Z

    def detected_fractions(self):
        """Share of each component within the detected subensemble"""
        if self.n_detected == 0:
            return tuple(0.0 for _ in self.per_component_detected)
        return tuple(c.detected / self.n_detected for c in self.per_component_detected)

    def prepared_fractions(self):
        return tuple(c.prepared / self.n_total for c in self.per_component_detected)


def make_stream(seed, shard=0, shards=1):
    """
    Independent random stream for one shard

    Parameters:
    - seed: 64-bit seed
    - shard: Shard index in [0, shards)
    - shards: Total number of shards

    Returns:
    - numpy.random.Generator on a Philox counter-based bit generator
    """
    children = np.random.SeedSequence(int(seed)).spawn(shards)
    return np.random.Generator(np.random.Philox(children[shard]))


@dataclass(frozen=True, eq=False)
class _SamplingTable:
    """Born weights and detection probabilities of one preparation branch"""

    weight: float
    born: np.ndarray
    detect: np.ndarray


def _branch_table(state, obs, model, weight):
    if isinstance(state, ProperMixture):
        raise InvalidStateError("mixture components must be pure")
    state_repr = state_repr_of(state)
    rho = state_repr.density()
    born = np.array([max(trace_product(rho, p).real, 0.0) for p in obs.spectral.projectors])
    born = born / born.sum()
    detect = np.array([model.probability(state_repr, obs, value) for value in obs.eigenvalues])
    return _SamplingTable(weight, born, detect)


def _sampling_tables(state, obs, model):
    # detection models are pure, so each (branch, eigenvalue) pair is evaluated once
    if isinstance(state, ProperMixture):
        return [
            _branch_table(c.state, obs, model.for_component(c.device_id), c.weight)
            for c in state.components
        ]
    return [_branch_table(state, obs, model, 1.0)]


def _draw_one(tables, obs, rng):
    if len(tables) > 1:
        branch = int(rng.choice(len(tables), p=[t.weight for t in tables]))
    else:
        branch = 0
    table = tables[branch]
    k = int(rng.choice(len(table.born), p=table.born))
    if rng.random() < table.detect[k]:
        return branch, obs.eigenvalues[k]
    return branch, obs.a0_label


def sample_outcome(state, obs, model, rng):
    """
    Draw one measurement outcome of obs

    Parameters:
    - state: Any state kind
    - obs: GeneralizedObservable
    - model: DetectionModel
    - rng: numpy.random.Generator

    Returns:
    - an eigenvalue of obs, or obs.a0_label when the object is not detected
    """
    _, outcome = _draw_one(_sampling_tables(state, obs, model), obs, rng)
    return outcome


def _run_shard(tables, prop, n, rng):
    outcomes = prop.outcomes
    in_x = np.array([value in outcomes.eigen_subset for value in prop.observable.eigenvalues])

    if len(tables) > 1:
        branches = rng.choice(len(tables), size=n, p=[t.weight for t in tables])
    else:
        branches = np.zeros(n, dtype=int)

    counts = []
    n_detected = 0
    n_yes = 0
    for index, table in enumerate(tables):
        prepared = int(np.count_nonzero(branches == index))
        if prepared == 0:
            counts.append(ComponentCount(index, 0, 0))
            continue
        eigen_index = rng.choice(len(table.born), size=prepared, p=table.born)
        detected = rng.random(prepared) < table.detect[eigen_index]
        yes = np.where(detected, in_x[eigen_index], outcomes.includes_a0)
        counts.append(ComponentCount(index, prepared, int(np.count_nonzero(detected))))
        n_detected += int(np.count_nonzero(detected))
        n_yes += int(np.count_nonzero(yes))
    return n_yes, n_detected, tuple(counts)


def _report(n_total, n_detected, n_yes, counts, z):
    frequency = n_yes / n_total
    halfwidth = z * math.sqrt(frequency * (1.0 - frequency) / n_total)
    return EnsembleReport(n_total, n_detected, n_yes, frequency, counts, halfwidth, z)


def merge_reports(reports, z=None):
    """
    Combine shard reports into one

    Parameters:
    - reports: Non-empty sequence of EnsembleReport over the same components
    - z: Confidence multiplier of the merged report (default: the first report's)

    Returns:
    - EnsembleReport with summed counts
    """
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to merge")
    z = reports[0].z if z is None else z
    n_total = sum(r.n_total for r in reports)
    counts = []
    for position, first in enumerate(reports[0].per_component_detected):
        counts.append(ComponentCount(
            first.index,
            sum(r.per_component_detected[position].prepared for r in reports),
            sum(r.per_component_detected[position].detected for r in reports),
        ))
    return _report(
        n_total,
        sum(r.n_detected for r in reports),
        sum(r.n_yes for r in reports),
        tuple(counts),
        z,
    )


def run_ensemble(state, prop, model, n, seed, z=DEFAULT_Z, shards=1):
    """
    Prepare and measure n independent copies of state

    Parameters:
    - state: Any state kind
    - prop: Property whose yes-frequency is reported
    - model: DetectionModel
    - n: Number of copies (at least 1)
    - seed: 64-bit seed; the same seed and shard count give the same report
    - z: Confidence multiplier for the normal-approximation half-width
    - shards: Number of independent streams evaluated in parallel

    Returns:
    - EnsembleReport
    """
    if n < 1:
        raise ValueError("the ensemble needs at least one copy")
    shards = max(1, min(int(shards), n))
    tables = _sampling_tables(state, prop.observable, model)
    sizes = [n // shards + (1 if k < n % shards else 0) for k in range(shards)]

    def shard_report(k):
        n_yes, n_detected, counts = _run_shard(tables, prop, sizes[k], make_stream(seed, k, shards))
        return _report(sizes[k], n_detected, n_yes, counts, z)

    if shards == 1:
        return shard_report(0)
    logger.debug("running %d copies over %d shards", n, shards)
    with ThreadPoolExecutor(max_workers=shards) as pool:
        reports = list(pool.map(shard_report, range(shards)))
    return merge_reports(reports, z)


def fair_sampling_diagnostic(m, prop, model, n, seed, z=DEFAULT_Z, shards=1):
    """
    Ensemble run on a proper mixture exposing how each component is
    represented among the detected objects

    Returns:
    - EnsembleReport whose detected_fractions() estimate the Bayes weights and
      whose prepared_fractions() estimate the mixture weights
    """
    if not isinstance(m, ProperMixture):
        raise InvalidStateError("the fair-sampling diagnostic applies to proper mixtures")
    if not prop.in_F_class:
        raise NoRegistrationOutcomeError("the fair-sampling diagnostic needs a property without a0")
    return run_ensemble(m, prop, model, n, seed, z, shards)
