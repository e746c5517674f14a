"""
Shared utilities: logging, error types and config file loading.
"""

import json
import logging
import os
from typing import Any, Dict

import yaml

import config

# Configure logging
logging.basicConfig(
    level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
    format='[%(asctime)s] [%(levelname)s] %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger("repeater")


class ConfigError(ValueError):
    """Invalid run configuration or parameter set. Message starts with the dotted location."""


class FockError(ValueError):
    """Base class for Fock-space engine failures."""


class TruncationError(FockError):
    """An occupation would exceed the truncation N_max."""


class ModeError(FockError):
    """Unknown, duplicate or mismatched modes."""


class NotPMEError(FockError):
    """Input state is not a "polarization" maximally entangled state."""


class SimulationError(RuntimeError):
    """Retry model cannot terminate (a success probability is zero)."""


def log(message: str, level: str = "INFO") -> None:
    """Log through the package logger; unknown level names fall back to INFO."""
    lvl = getattr(logging, level.upper(), logging.INFO)
    logger.log(lvl, message)


def load_structured(filepath: str) -> Dict[str, Any]:
    """
    Load a JSON or YAML document into a dict.
    The format is picked from the file extension; anything that is not
    .yaml/.yml is read as JSON.
    """
    if not os.path.exists(filepath):
        raise ConfigError(f"{filepath}: config file not found")

    ext = os.path.splitext(filepath)[1].lower()
    try:
        with open(filepath, 'r') as f:
            if ext in (".yaml", ".yml"):
                data = yaml.safe_load(f)
            else:
                data = json.load(f)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"{filepath}: could not parse ({e})") from e

    if not isinstance(data, dict):
        raise ConfigError(f"{filepath}: top level must be a mapping")
    return data


def canonical_json(data: Any) -> str:
    """Stable text form used for round-trip comparisons and output files."""
    return json.dumps(data, sort_keys=True, indent=2)
