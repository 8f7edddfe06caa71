"""Simulation toolkit for matter-wave diffraction and Talbot-Lau interferometry with large molecules."""
from .core import (
    BeamSource,
    Particle,
    VelocityDistribution,
    coherence_lengths,
    de_broglie_wavelength,
    grating_momentum_equivalent,
    kinetic_energy,
    recoil_coherence_bound,
    rotational_stats,
    talbot_scales,
)
from .errors import DomainError, FitError, MatterSimError, QuadratureError, ResolutionError

__version__ = "0.1.0"

__all__ = [
    "BeamSource",
    "Particle",
    "VelocityDistribution",
    "coherence_lengths",
    "de_broglie_wavelength",
    "grating_momentum_equivalent",
    "kinetic_energy",
    "recoil_coherence_bound",
    "rotational_stats",
    "talbot_scales",
    "DomainError",
    "FitError",
    "MatterSimError",
    "QuadratureError",
    "ResolutionError",
]
