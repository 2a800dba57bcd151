"""Jump-SDE laboratory: simulation, assumption checks and Bihari bounds."""

import json

from ._core import (
    CatalogError,
    ConfigError,
    DomainError,
    JsdeError,
    NumericalDomainError,
    QuadratureError,
    RangeError,
    ResourceError,
    a_sequence,
    bihari_bound,
    moduli,
    presets,
    simulate,
)
from . import _core


def verify(preset, assumption):
    """Assumption report (dict) for a preset's designated profile."""
    return json.loads(_core.verify_json(preset, assumption))


def run_experiment(config_text="", **overrides):
    """Run an experiment; keyword overrides use section__key names, e.g. experiment__paths=100."""
    sets = [f"{k.replace('__', '.')}={v}" for k, v in overrides.items()]
    return json.loads(_core.run_experiment_json(config_text, sets))


__all__ = [
    "CatalogError", "ConfigError", "DomainError", "JsdeError", "NumericalDomainError",
    "QuadratureError", "RangeError", "ResourceError", "a_sequence", "bihari_bound",
    "moduli", "presets", "run_experiment", "simulate", "verify",
]
