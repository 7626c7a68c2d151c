import logging
import os
import zlib

import numpy as np
from dotenv import load_dotenv

from .errors import ConfigError

DEFAULT_TOL = 1e-9
_LOG_LEVEL = os.getenv("NCLP_LOG_LEVEL", "WARNING").upper()

# Configure logging; the CLI rejects unknown level names
logging.basicConfig(
    level=_LOG_LEVEL if isinstance(logging.getLevelName(_LOG_LEVEL), int) else "WARNING",
    format="%(asctime)s [%(levelname)s] %(message)s",
    datefmt="%H:%M:%S"
)
logger = logging.getLogger(__name__)


def load_base_env():
    """Load environment variables from .env file."""
    load_dotenv()


def load_config():
    """Load run defaults from environment variables."""
    load_base_env()

    config = {
        "tol": _env_float("NCLP_TOL", DEFAULT_TOL),
        "workers": _env_int("NCLP_WORKERS", 1),
        "seed": _env_int("NCLP_SEED", 0),
        "log_level": os.getenv("NCLP_LOG_LEVEL", "WARNING").upper(),
    }
    validate_config(config, ["tol", "workers", "log_level"])
    return config


def validate_config(config, required_fields):
    """Validate that required fields are present in the config."""
    missing_fields = [field for field in required_fields if config.get(field) in (None, "")]
    if missing_fields:
        logger.error(f"Missing required configuration: {', '.join(missing_fields)}")
        raise ConfigError(f"Missing required configuration: {', '.join(missing_fields)}")


def validate_run_config(p, trials, tol):
    """Reject exponents, trial counts and tolerances outside their ranges."""
    problems = []
    if not p >= 1:
        problems.append(f"p must be >= 1 (got {p})")
    if not trials >= 1:
        problems.append(f"trials must be >= 1 (got {trials})")
    if not tol > 0:
        problems.append(f"tol must be > 0 (got {tol})")
    if problems:
        logger.error(f"Invalid run configuration: {'; '.join(problems)}")
        raise ConfigError("; ".join(problems))


def resolve_tol(tol=None):
    """Return tol, or the NCLP_TOL override, or the library default."""
    if tol is not None:
        return float(tol)
    return _env_float("NCLP_TOL", DEFAULT_TOL)


def set_log_level(level):
    logging.getLogger().setLevel(str(level).upper())


def trial_rng(seed, name, index):
    """Independent generator for one trial of one named check."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode("utf-8")), int(index)])


def _env_float(name, default):
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number (got {raw!r})") from None


def _env_int(name, default):
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer (got {raw!r})") from None
