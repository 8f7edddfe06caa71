"""Paraxial Fresnel propagation of 1D transverse fields in a periodic window."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, ResolutionError

__all__ = [
    "Grid",
    "TransverseField",
    "point_source_field",
    "apply_transmission",
    "fresnel_propagate",
]


@dataclass(frozen=True)
class Grid:
    """Cell-centred periodic sampling: ``n`` samples spanning ``n_periods`` periods ``d``.

    Sample k sits at ``(k + 1/2) * pitch``.
    """

    n: int
    period: float
    n_periods: int = 1

    def __post_init__(self):
        if self.n <= 0 or self.n_periods <= 0 or self.period <= 0:
            raise DomainError("grid needs positive size, period and period count")
        if self.n % self.n_periods:
            raise ResolutionError("sample count must be an integer multiple of the period count")

    @property
    def window(self) -> float:
        return self.n_periods * self.period

    @property
    def pitch(self) -> float:
        return self.window / self.n

    @property
    def samples_per_period(self) -> int:
        return self.n // self.n_periods

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.pitch

    @property
    def frequencies(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, self.pitch)


@dataclass(frozen=True)
class TransverseField:
    """Complex wavefunction samples on a :class:`Grid` at de Broglie wavelength ``lambda_dB``."""

    samples: np.ndarray
    grid: Grid
    lambda_dB: float

    def __post_init__(self):
        if self.samples.shape != (self.grid.n,):
            raise ResolutionError(
                f"field has {self.samples.shape} samples but grid expects {self.grid.n}"
            )

    @property
    def pitch(self) -> float:
        return self.grid.pitch

    @property
    def window(self) -> float:
        return self.grid.window

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.grid.pitch))

    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2


def point_source_field(x0: float, width: float, lambda_dB: float, grid: Grid) -> TransverseField:
    """Unit-norm top-hat amplitude of ``width`` centred at ``x0`` (periodic distance)."""
    if width < 2 * grid.pitch:
        raise ResolutionError(
            f"source width {width:.3e} m is below two grid pitches ({2 * grid.pitch:.3e} m)"
        )
    if lambda_dB <= 0:
        raise DomainError("lambda_dB must be positive")
    if width >= grid.window:
        amplitude = np.ones(grid.n, dtype=complex)
    else:
        dist = (grid.x - x0 + 0.5 * grid.window) % grid.window - 0.5 * grid.window
        amplitude = (np.abs(dist) < 0.5 * width).astype(complex)
    norm = np.sqrt(np.sum(np.abs(amplitude) ** 2) * grid.pitch)
    if norm == 0:
        raise ResolutionError("source top-hat contains no grid samples")
    return TransverseField(amplitude / norm, grid, lambda_dB)


def apply_transmission(field: TransverseField, transmission) -> TransverseField:
    """Pointwise product of a field with transmission samples on the same grid."""
    transmission = np.asarray(transmission)
    if transmission.shape != field.samples.shape:
        raise ResolutionError(
            f"transmission shape {transmission.shape} does not match field {field.samples.shape}"
        )
    return replace(field, samples=field.samples * transmission)


def transfer_function(grid: Grid, lambda_dB: float, distance: float) -> np.ndarray:
    q = grid.frequencies
    return np.exp(-1j * np.pi * lambda_dB * distance * q * q)


def fresnel_propagate(field: TransverseField, distance: float) -> TransverseField:
    """Propagate by ``distance`` with the paraxial kernel exp(-i pi lambda z q^2)."""
    if distance < 0:
        raise DomainError("propagation distance must be non-negative")
    if distance == 0:
        return replace(field, samples=field.samples.copy())
    spectrum = np.fft.fft(field.samples)
    spectrum *= transfer_function(field.grid, field.lambda_dB, distance)
    return replace(field, samples=np.fft.ifft(spectrum))
