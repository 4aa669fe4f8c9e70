"""Pulse design and verification for GHZ preparation with the global Molmer-Sorensen gate."""

__version__ = "0.1.0"

from .pulses import Pulse, echo_transform, lemniscate_alpha, make_lemniscate, make_pulse, make_rectangular
from .trajectory import (
    MagnusCoefficients,
    PhaseTrajectory,
    chi_phase,
    integrate_trajectory,
    lemniscate_design_point,
    magnus_coefficients,
)
from .spin_moments import sx_moment
from .perturbative import optimal_amplitude, perturbative_infidelity, phonon_probability
from .tdse import SimulationConfig, SimulationResult, ghz_fidelity, simulate

__all__ = [
    "Pulse", "echo_transform", "lemniscate_alpha", "make_lemniscate", "make_pulse", "make_rectangular",
    "MagnusCoefficients", "PhaseTrajectory", "chi_phase", "integrate_trajectory",
    "lemniscate_design_point", "magnus_coefficients", "sx_moment", "optimal_amplitude",
    "perturbative_infidelity", "phonon_probability", "SimulationConfig", "SimulationResult",
    "ghz_fidelity", "simulate",
]
