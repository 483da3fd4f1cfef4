import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from data.data_manager import ExperimentManager
from utils.detection import detect_prob_property
from utils.export import ResultRow, rows_to_frame
from utils.montecarlo import run_ensemble
from utils.probability import conditional_prob, overall_prob, quantum_prob

logger = logging.getLogger(__name__)


def row_seed(seed, index):
    """Seed of the Monte Carlo run behind sweep row `index`"""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, dtype=np.uint64)[0])


def compute_row(config, sweep_value=None, index=0, with_mc=False, mc=None):
    """
    One result row of the configured experiment

    Parameters:
    - config: ExperimentConfig
    - sweep_value: Value of the swept angle, or None without a sweep
    - index: Position of the row in the sweep
    - with_mc: Add Monte Carlo frequency and half-width
    - mc: MonteCarloSpec overriding config.monte_carlo

    Returns:
    - ResultRow
    """
    parameter = config.sweep.parameter if config.sweep is not None and sweep_value is not None else None
    obs = ExperimentManager.observable_at(config, parameter, sweep_value)
    prop = ExperimentManager.build_property(config, obs)
    state = config.states[config.target_state]
    model = ExperimentManager.detection_model_for(config)

    row = dict(
        sweep_value=math.nan if sweep_value is None else float(sweep_value),
        p_conditional=conditional_prob(state, prop, model),
        p_overall=overall_prob(state, prop, model),
        p_quantum=quantum_prob(state, prop),
        p_detect=detect_prob_property(model, state, prop),
    )
    if with_mc:
        mc = mc or config.monte_carlo
        report = run_ensemble(state, prop, model, mc.n, row_seed(mc.seed, index), mc.z, mc.shards)
        row.update(mc_frequency=report.yes_frequency, mc_halfwidth=report.confidence_halfwidth)
    return ResultRow(**row)


def generate_sweep_report(config, with_mc=False, mc=None, max_workers=None):
    """
    Result rows over the configured sweep, in sweep order

    Parameters:
    - config: ExperimentConfig
    - with_mc: Add Monte Carlo columns
    - mc: MonteCarloSpec overriding config.monte_carlo
    - max_workers: Thread count for row evaluation (default: CPU count)

    Returns:
    - DataFrame with the result columns
    """
    if config.sweep is None:
        return rows_to_frame([compute_row(config, None, 0, with_mc, mc)])

    values = config.sweep.values()
    logger.debug("evaluating %d sweep rows over %s", len(values), config.sweep.parameter)
    workers = max_workers or min(len(values), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(
            lambda item: compute_row(config, item[1], item[0], with_mc, mc),
            enumerate(values),
        ))
    return rows_to_frame(rows)
