"""Monte Carlo simulation of a thermostatted two-level junction with a sink."""

from .model import AdiabaticPair, ModelParams
from .dynamics import ExtendedPoint, propagate_element, step
from .ensemble import EnsembleRecord, run_ensemble

__all__ = [
    "AdiabaticPair",
    "EnsembleRecord",
    "ExtendedPoint",
    "ModelParams",
    "propagate_element",
    "run_ensemble",
    "step",
]

__version__ = "0.1.0"
