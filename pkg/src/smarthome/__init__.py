"""Simulator-backed two-room home automation: threshold/PWM rules with
occupancy gating, duty-cycle energy accounting, and an HTTP control API."""

__version__ = "0.1.0"

from .engine import Mode, Thresholds
from .envsim import Scenario, builtin_reference_scenario, env_at, load_scenario
from .hal import default_manifest, load_manifest
from .service import Service

__all__ = [
    "Mode",
    "Thresholds",
    "Scenario",
    "builtin_reference_scenario",
    "env_at",
    "load_scenario",
    "default_manifest",
    "load_manifest",
    "Service",
    "__version__",
]
