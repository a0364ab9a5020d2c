"""Python access to the RSMA/SDMA AoII scheduler."""

import json

from ._core import (
    ConfigError,
    config_hash,
    geometric_pair,
    rayleigh,
    schedule,
    snr_to_power,
)
from . import _core

__all__ = [
    "ConfigError",
    "config_hash",
    "geometric_pair",
    "monte_carlo",
    "rayleigh",
    "schedule",
    "snr_to_power",
    "sweep_users",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def sweep_users(config):
    """Scheduled-user counts on the geometric pair; `config` is a dict or JSON text."""
    return _core.sweep_users(_text(config))


def monte_carlo(config, jobs=1):
    """Returns (rows, summary) for a Rayleigh Monte Carlo config."""
    rows, summary = _core.monte_carlo(_text(config), jobs)
    return rows, json.loads(summary)
