"""Standing-light-wave gratings.

A retro-reflected laser of wavelength ``lambda_L`` imprints the phase
``phi0 cos^2(k_L x)`` through the optical dipole force and lets a molecule
absorb on average ``n0 cos^2(k_L x)`` photons. Absorption is handled by
splitting the transmitted wave into photon-number classes ``j``. Within a
class the molecule stays coherent and each absorbed photon contributes an
amplitude proportional to the local field ``cos(k_L x)``, i.e. a coherent
superposition of +hbar k_L and -hbar k_L recoils.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from . import constants as const
from .core import Particle
from .errors import DomainError

__all__ = [
    "OpticalGrating",
    "GratingInteraction",
    "phase_parameter",
    "absorption_parameter",
    "photon_class_transmission",
    "incoherent_class_amplitude",
    "analytic_orders",
    "poisson_tail",
]

DEFAULT_TAIL_TOL = 1e-10


@dataclass(frozen=True)
class OpticalGrating:
    """Standing laser wave; ``wavelength`` in m, ``power`` in W, waists in m."""

    wavelength: float
    power: float
    waist_y: float
    waist_z: float
    mode: Literal["phase_absorption", "depletion_only"] = "phase_absorption"

    def __post_init__(self):
        if not (self.wavelength > 0 and self.waist_y > 0 and self.waist_z > 0):
            raise DomainError("optical grating wavelength and waists must be positive")
        if self.power < 0:
            raise DomainError("laser power must be non-negative")
        if self.mode not in ("phase_absorption", "depletion_only"):
            raise DomainError(f"unknown optical grating mode {self.mode!r}")

    @property
    def period(self) -> float:
        return 0.5 * self.wavelength

    @property
    def k_L(self) -> float:
        return 2 * math.pi / self.wavelength


def poisson_tail(j_max: int, n0: float) -> float:
    """Probability of absorbing more than ``j_max`` photons at mean ``n0``."""
    if n0 == 0:
        return 0.0
    return float(stats.poisson.sf(j_max, n0))


@dataclass(frozen=True)
class GratingInteraction:
    """Peak phase ``phi0`` and peak mean photon number ``n0`` of a grating passage.

    ``j_max`` defaults to 4 and is raised until the Poisson tail beyond it
    falls below ``tail_tol``.
    """

    phi0: float
    n0: float
    j_max: int | None = None
    mode: Literal["phase_absorption", "depletion_only"] = "phase_absorption"
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        if self.phi0 < 0 or self.n0 < 0:
            raise DomainError("phi0 and n0 must be non-negative")
        if self.j_max is None:
            j = 4
            while poisson_tail(j, self.n0) >= self.tail_tol:
                j += 1
            object.__setattr__(self, "j_max", j)
        elif self.j_max < 0:
            raise DomainError("j_max must be non-negative")

    @property
    def truncation_deficit(self) -> float:
        if self.mode == "depletion_only":
            return 0.0
        return poisson_tail(self.j_max, self.n0)

    @property
    def classes(self) -> range:
        """Photon classes that carry transmitted molecules."""
        return range(1) if self.mode == "depletion_only" else range(self.j_max + 1)


def phase_parameter(grating: OpticalGrating, particle: Particle, v_z):
    """Peak dipole phase 4 sqrt(2 pi) alpha P / (h c eps0 w_y v)."""
    v_z = np.asarray(v_z, dtype=float)
    if np.any(v_z <= 0):
        raise DomainError("v_z must be positive")
    alpha = const.polarizability_si(particle.alpha_optical)
    phi0 = 4 * math.sqrt(2 * math.pi) * alpha * grating.power / (
        const.h * const.c * const.epsilon_0 * grating.waist_y * v_z
    )
    return phi0[()]


def absorption_parameter(grating: OpticalGrating, particle: Particle, v_z):
    """Peak mean photon number 8 sigma lambda P / (sqrt(2 pi) h c w_y v)."""
    v_z = np.asarray(v_z, dtype=float)
    if np.any(v_z <= 0):
        raise DomainError("v_z must be positive")
    n0 = 8 * particle.sigma_abs * grating.wavelength * grating.power / (
        math.sqrt(2 * math.pi) * const.h * const.c * grating.waist_y * v_z
    )
    return n0[()]


def photon_class_transmission(inter: GratingInteraction, j: int, x, k_L: float) -> np.ndarray:
    """Amplitude transmission of photon class ``j`` sampled at positions ``x``.

    t_j = exp(i phi0 c^2) exp(-n0 c^2 / 2) (i sqrt(n0) c)^j / sqrt(j!) with
    c = cos(k_L x). In depletion-only mode the phase is dropped and only the
    unabsorbed class j = 0 is transmitted.
    """
    if j < 0 or j > inter.j_max or (inter.mode == "depletion_only" and j > 0):
        raise DomainError(f"photon class {j} outside retained range 0..{max(inter.classes)}")
    c = np.cos(k_L * np.asarray(x, dtype=float))
    c2 = c * c
    phi0 = 0.0 if inter.mode == "depletion_only" else inter.phi0
    t = np.exp(1j * phi0 * c2 - 0.5 * inter.n0 * c2)
    if j:
        t = t * (1j * math.sqrt(inter.n0) * c) ** j / math.sqrt(math.factorial(j))
    return t


def incoherent_class_amplitude(inter: GratingInteraction, j: int, x, k_L: float) -> np.ndarray:
    """Class-``j`` amplitude for stochastic absorption.

    The modulus is the square root of the local Poisson probability, as for
    the coherent classes, but without the sign of the field: the recoil
    direction is a classical random variable applied to the intensity later.
    """
    c2 = np.cos(k_L * np.asarray(x, dtype=float)) ** 2
    t = np.exp(1j * inter.phi0 * c2 - 0.5 * inter.n0 * c2)
    if j:
        t = t * np.sqrt((inter.n0 * c2) ** j / math.factorial(j))
    return t


def analytic_orders(phi0: float, n_max: int, n_samples: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Far-field order intensities of the pure phase grating exp(i phi0 cos^2).

    Computed by discrete Fourier decomposition of one period. By the
    Jacobi-Anger expansion ``|c_n| = |J_n(phi0 / 2)|``; successive orders
    differ by two photon momenta 2 hbar k_L.

    Returns
    -------
    n : ndarray of int
    intensity : ndarray
    """
    if 2 * n_max >= n_samples:
        raise DomainError(f"n_max={n_max} exceeds Nyquist limit of {n_samples} samples")
    u = (np.arange(n_samples) + 0.5) / n_samples  # x / d
    t = np.exp(1j * phi0 * np.cos(np.pi * u) ** 2)
    coeffs = np.fft.fft(t) / n_samples
    n = np.arange(-n_max, n_max + 1)
    return n, np.abs(coeffs[n]) ** 2
