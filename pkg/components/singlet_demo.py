import logging

import numpy as np
import pandas as pd

from data.data_manager import ExperimentManager
from data.sample_data import generate_singlet_config
from utils.config import PROBABILITY_SLACK
from utils.errors import ConfigError, NumericalIntegrityError
from utils.probability import (
    composite_conditional_prob,
    composite_overall_prob,
    conditional_prob,
    overall_prob,
)
from utils.states import ImproperMixture

logger = logging.getLogger(__name__)

SINGLET_COLUMNS = [
    "sweep_value",
    "p_conditional_reduced",
    "p_conditional_composite",
    "p_overall_reduced",
    "p_overall_composite",
    "max_deviation",
]


def singlet_demo(config=None):
    """
    Subsystem probabilities of a composite pure state, computed once on the
    reduced density operator and once on the composite space

    Parameters:
    - config: ExperimentConfig whose target state is a composite vector
      (default: first particle of the singlet)

    Returns:
    - DataFrame with one row per direction of the sweep
    """
    if config is None:
        config = ExperimentManager.parse_config(generate_singlet_config())
    reduced = config.states[config.target_state]
    if not isinstance(reduced, ImproperMixture) or reduced.provenance is None:
        raise ConfigError("the singlet walkthrough needs a composite target state", "target_state")
    provenance = reduced.provenance
    model = ExperimentManager.detection_model_for(config)

    if config.sweep is None:
        grid = [(None, None)]
    else:
        grid = [(config.sweep.parameter, value) for value in config.sweep.values()]

    records = []
    for parameter, value in grid:
        obs = ExperimentManager.observable_at(config, parameter, value)
        prop = ExperimentManager.build_property(config, obs)
        record = {
            "sweep_value": np.nan if value is None else float(value),
            "p_conditional_reduced": conditional_prob(reduced, prop, model),
            "p_conditional_composite": composite_conditional_prob(
                provenance.psi, provenance.dim_first, provenance.dim_second, prop
            ),
            "p_overall_reduced": overall_prob(reduced, prop, model),
            "p_overall_composite": composite_overall_prob(
                provenance.psi, provenance.dim_first, provenance.dim_second, prop, model
            ),
        }
        record["max_deviation"] = max(
            abs(record["p_conditional_reduced"] - record["p_conditional_composite"]),
            abs(record["p_overall_reduced"] - record["p_overall_composite"]),
        )
        if record["max_deviation"] > PROBABILITY_SLACK:
            raise NumericalIntegrityError(
                f"reduced and composite probabilities differ by {record['max_deviation']:.3g} for {prop!r}"
            )
        records.append(record)

    logger.debug("singlet walkthrough: %d directions", len(records))
    return pd.DataFrame(records, columns=SINGLET_COLUMNS)
