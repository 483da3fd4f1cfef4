import os
import logging

logger = logging.getLogger(__name__)

# Fixed numerical constants
MIN_COMPONENT_WEIGHT = 1e-12
PROBABILITY_SLACK = 1e-10
DEFAULT_Z = 3.0

_DEFAULT_TOL = 1e-10
_DEFAULT_MAX_DIM = 64
_DEFAULT_LOG_LEVEL = "WARNING"


def _read_env_number(name, default, cast):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = cast(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r: not a valid number", name, raw)
        return default
    if value <= 0:
        logger.warning("Ignoring %s=%r: must be positive", name, raw)
        return default
    return value


def get_default_tol():
    """
    Numerical tolerance for Hermiticity, idempotency, normalization and
    eigenvalue merging

    Returns:
    - ESR_DEFAULT_TOL from the environment if set and valid, else 1e-10
    """
    return _read_env_number("ESR_DEFAULT_TOL", _DEFAULT_TOL, float)


def get_max_dim():
    """Largest Hilbert-space dimension accepted (ESR_MAX_DIM, default 64)"""
    return _read_env_number("ESR_MAX_DIM", _DEFAULT_MAX_DIM, int)


def get_log_level():
    return os.environ.get("ESR_LOG_LEVEL", _DEFAULT_LOG_LEVEL).upper()


def resolve_tol(tol):
    """Return tol, or the configured default when tol is None"""
    return get_default_tol() if tol is None else tol
