"""Particle and beam data model plus closed-form scale calculators.

Masses are given in atomic mass units, polarizabilities as volumes in cubic
angstrom and everything else in SI units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
from scipy import special

from . import constants as const
from .errors import DomainError, QuadratureError

__all__ = [
    "Particle",
    "VelocityDistribution",
    "BeamSource",
    "de_broglie_wavelength",
    "coherence_lengths",
    "talbot_scales",
    "grating_momentum_equivalent",
    "recoil_coherence_bound",
    "rotational_stats",
    "kinetic_energy",
]


def _positive(name, value):
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value!r}")


def _non_negative(name, value):
    if not value >= 0:
        raise DomainError(f"{name} must be non-negative, got {value!r}")


@dataclass(frozen=True)
class Particle:
    """A molecule or cluster travelling through the interferometer.

    Parameters
    ----------
    name : str
        Label used in reports.
    mass : float
        Mass in amu.
    alpha_static, alpha_optical : float
        Static and optical polarizability volumes in cubic angstrom.
    sigma_abs : float
        Absorption cross section at the grating wavelength, m^2.
    moment_of_inertia : float, optional
        kg m^2.
    dipole_moment : float, optional
        Debye.
    """

    name: str
    mass: float
    alpha_static: float = 0.0
    alpha_optical: float = 0.0
    sigma_abs: float = 0.0
    moment_of_inertia: Optional[float] = None
    dipole_moment: Optional[float] = None

    def __post_init__(self):
        _positive("mass", self.mass)
        _non_negative("alpha_static", self.alpha_static)
        _non_negative("alpha_optical", self.alpha_optical)
        _non_negative("sigma_abs", self.sigma_abs)
        if self.moment_of_inertia is not None:
            _positive("moment_of_inertia", self.moment_of_inertia)

    @property
    def mass_kg(self) -> float:
        return self.mass * const.amu


@dataclass(frozen=True)
class VelocityDistribution:
    """Longitudinal velocity distribution of the beam.

    ``kind`` is one of

    * ``"delta"`` - every molecule moves at ``v_mean``;
    * ``"gaussian"`` - normal with mean ``v_mean`` and standard deviation
      ``v_spread``, truncated to v > 0 and renormalized;
    * ``"maxwell_boltzmann_beam"`` - flux-weighted f(v) ~ v^3 exp(-v^2/a^2)
      with a = ``v_spread``. ``v_mean`` only sets the nominal scale of the
      integration window.
    """

    kind: Literal["delta", "gaussian", "maxwell_boltzmann_beam"]
    v_mean: float
    v_spread: float = 0.0

    def __post_init__(self):
        if self.kind not in ("delta", "gaussian", "maxwell_boltzmann_beam"):
            raise DomainError(f"unknown velocity distribution kind {self.kind!r}")
        _positive("v_mean", self.v_mean)
        _non_negative("v_spread", self.v_spread)
        if self.kind != "delta" and self.v_spread == 0:
            raise DomainError(f"{self.kind} distribution needs v_spread > 0")

    @classmethod
    def delta(cls, v):
        return cls("delta", v, 0.0)

    @property
    def is_degenerate(self) -> bool:
        return self.kind == "delta"

    def mean(self) -> float:
        if self.kind == "maxwell_boltzmann_beam":
            return 0.75 * math.sqrt(math.pi) * self.v_spread
        if self.kind == "gaussian":
            a = self.v_mean / self.v_spread
            return self.v_mean + self.v_spread * math.exp(-0.5 * a * a) / (
                math.sqrt(2 * math.pi) * special.ndtr(a)
            )
        return self.v_mean

    def std(self) -> float:
        if self.kind == "maxwell_boltzmann_beam":
            return self.v_spread * math.sqrt(2.0 - 9.0 * math.pi / 16.0)
        if self.kind == "gaussian":
            a = -self.v_mean / self.v_spread
            lam = math.exp(-0.5 * a * a) / (math.sqrt(2 * math.pi) * special.ndtr(-a))
            return self.v_spread * math.sqrt(1.0 + a * lam - lam * lam)
        return 0.0

    def support(self) -> tuple[float, float]:
        """Integration window outside of which the density is negligible."""
        if self.kind == "delta":
            return self.v_mean, self.v_mean
        if self.kind == "gaussian":
            return max(0.0, self.v_mean - 10 * self.v_spread), self.v_mean + 10 * self.v_spread
        return 0.0, self.v_mean + 10 * self.v_spread

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        if self.kind == "delta":
            raise DomainError("a delta distribution has no density")
        out = np.zeros_like(v)
        pos = v > 0
        if self.kind == "gaussian":
            norm = self.v_spread * math.sqrt(2 * math.pi) * special.ndtr(self.v_mean / self.v_spread)
            out[pos] = np.exp(-0.5 * ((v[pos] - self.v_mean) / self.v_spread) ** 2) / norm
        else:
            a = self.v_spread
            out[pos] = 2.0 * v[pos] ** 3 * np.exp(-((v[pos] / a) ** 2)) / a**4
        return out

    def integrate(self, func: Callable, rtol: float = 1e-10, max_nodes: int = 8192):
        """Expectation value of ``func(v)`` under the distribution.

        Gauss-Legendre quadrature over :meth:`support`, doubling the node
        count until two successive estimates agree to ``rtol``.
        ``func`` must be vectorized over its first axis.
        """
        if self.kind == "delta":
            return np.asarray(func(np.array([self.v_mean])))[0]
        lo, hi = self.support()
        previous = None
        n = 32
        while n <= max_nodes:
            x, w = np.polynomial.legendre.leggauss(n)
            v = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            w = 0.5 * (hi - lo) * w * self.pdf(v)
            values = np.asarray(func(v))
            estimate = np.tensordot(w, values, axes=(0, 0))
            if previous is not None:
                scale = max(np.max(np.abs(estimate)), 1e-300)
                if np.max(np.abs(estimate - previous)) <= rtol * scale:
                    return estimate
            previous = estimate
            n *= 2
        raise QuadratureError(
            f"velocity quadrature did not reach rtol={rtol:g} with {max_nodes} nodes "
            f"({self.kind}, v_mean={self.v_mean}, v_spread={self.v_spread})"
        )

    def quadrature(self, n: int, n_sigma: float = 3.0) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes over mean +- ``n_sigma`` std, weights summing to 1."""
        if self.kind == "delta" or n == 1:
            return np.array([self.mean() if self.kind != "delta" else self.v_mean]), np.array([1.0])
        center, width = self.mean(), n_sigma * self.std()
        lo, hi = max(center - width, 1e-9 * center), center + width
        x, w = np.polynomial.legendre.leggauss(n)
        v = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        w = w * self.pdf(v)
        return v, w / w.sum()

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "delta":
            return np.full(size, self.v_mean)
        if self.kind == "maxwell_boltzmann_beam":
            return self.v_spread * np.sqrt(rng.gamma(2.0, 1.0, size))
        out = rng.normal(self.v_mean, self.v_spread, size)
        bad = out <= 0
        while bad.any():
            out[bad] = rng.normal(self.v_mean, self.v_spread, bad.sum())
            bad = out <= 0
        return out


@dataclass(frozen=True)
class BeamSource:
    """Source width D, distance L to the first optical element and velocities."""

    source_width: float
    distance_to_first_element: float
    velocity: VelocityDistribution

    def __post_init__(self):
        _positive("source_width", self.source_width)
        _positive("distance_to_first_element", self.distance_to_first_element)


def de_broglie_wavelength(mass, v):
    """h / (m v) for a mass in amu and a velocity in m/s."""
    _positive("mass", mass)
    if np.any(np.asarray(v) <= 0):
        raise DomainError(f"velocity must be positive, got {v!r}")
    return const.h / (mass * const.amu * np.asarray(v, dtype=float)[()])


def coherence_lengths(source: BeamSource, lambda_dB: float, delta_lambda: float) -> dict:
    """Longitudinal and transverse coherence lengths.

    ``L_c = lambda^2 / delta_lambda`` (``inf`` for a monochromatic beam) and
    ``X_c = 2 L lambda / D``.
    """
    _positive("lambda_dB", lambda_dB)
    _non_negative("delta_lambda", delta_lambda)
    L_c = math.inf if delta_lambda == 0 else lambda_dB**2 / delta_lambda
    X_c = 2 * source.distance_to_first_element * lambda_dB / source.source_width
    return {"L_c": L_c, "X_c": X_c}


def talbot_scales(d: float, lambda_dB: float, mass: float) -> dict:
    """Talbot length d^2/lambda and Talbot time d^2 m / h."""
    _positive("d", d)
    _positive("lambda_dB", lambda_dB)
    _positive("mass", mass)
    return {"L_T": d * d / lambda_dB, "T_T": d * d * mass * const.amu / const.h}


def grating_momentum_equivalent(d: float, n_orders: float, reference_wavelength: float) -> float:
    """Momentum n h/d of diffraction order n in units of photon recoils hbar*2pi/lambda_ref."""
    _positive("d", d)
    _positive("reference_wavelength", reference_wavelength)
    return n_orders * reference_wavelength / d


def recoil_coherence_bound(dx_grating: float) -> float:
    """Smallest slit opening that still diffracts coherently, 1.78 pi dx_grating."""
    _positive("dx_grating", dx_grating)
    return 1.78 * math.pi * dx_grating


def rotational_stats(I: float, T: float) -> dict:
    """Rotational temperature hbar^2/(2 I k_B) and thermal J estimate sqrt(T/B)."""
    _positive("I", I)
    _positive("T", T)
    B_temp = const.hbar**2 / (2 * I * const.k_B)
    return {"B_temp": B_temp, "J_mean": math.sqrt(T / B_temp)}


def kinetic_energy(mass: float, v: float) -> float:
    """Kinetic energy in eV."""
    _positive("mass", mass)
    _non_negative("v", v)
    return 0.5 * mass * const.amu * v * v / const.e
