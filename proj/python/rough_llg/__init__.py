"""Rough Landau-Lifshitz-Gilbert solver: Python bindings to the C++ core."""

import json
from pathlib import Path

from ._rough_llg import (
    ConfigError,
    Driver,
    NumericalAbort,
    __version__,
    cm_rate,
    energy,
    noise_driver,
    p_variation,
    project_sphere,
    sample_bm,
    solve,
    solve_deterministic,
    tension,
)
from . import _rough_llg

__all__ = [
    "ConfigError",
    "Driver",
    "NumericalAbort",
    "cm_rate",
    "energy",
    "noise_driver",
    "p_variation",
    "parse_config",
    "project_sphere",
    "run_experiment",
    "sample_bm",
    "solve",
    "solve_deterministic",
    "tension",
]


def _text(config):
    if isinstance(config, (str, Path)) and Path(config).is_file():
        return Path(config).read_text()
    if isinstance(config, dict):
        return json.dumps(config)
    return str(config)


def parse_config(config):
    """Validate a config (dict, JSON text or path) and return it with defaults filled in."""
    return json.loads(_rough_llg.parse_config(_text(config)))


def run_experiment(config, out):
    """Run one experiment, writing artifacts into ``out``; returns the summary dict."""
    return json.loads(_rough_llg.run_experiment(_text(config), str(out)))
