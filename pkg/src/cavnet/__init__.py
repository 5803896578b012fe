"""Coupled-mode simulation and photon-statistics toolkit for cavity-waveguide-cavity
photonic networks."""

__version__ = "0.1.0"

from .cmt import (Detunings, DriveTerm, NetworkState, Trajectory, evolve, frequency_response,
                  steady_state, transfer_ratio)
from .netmodel import CouplingRates, EmitterSpec, FITTED_RATES, load_preset

__all__ = [
    "__version__", "CouplingRates", "EmitterSpec", "FITTED_RATES", "load_preset", "Detunings",
    "DriveTerm", "NetworkState", "Trajectory", "evolve", "frequency_response", "steady_state",
    "transfer_ratio",
]
