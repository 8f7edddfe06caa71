"""Kapitza-Dirac-Talbot-Lau interferometer.

G1 (material mask) -> free flight L -> G2 (standing light wave) -> free flight
L -> G3 (material mask scanned transversely). Every open point of G1 acts as
an independent emitter; the emitters, the photon-number classes of G2 and the
velocity classes are summed incoherently. The counts behind G3 as a function
of its transverse offset form the fringe scan.

Three G2 models are available:

``phase_only``
    Dipole phase grating, absorption switched off.
``coherent_absorption``
    Photon classes j = 0..j_max with amplitudes proportional to
    (i sqrt(n0) cos(k_L x))^j, i.e. coherent +-hbar k_L recoil superpositions.
``incoherent_absorption``
    Same class probabilities, but the j recoils are classical random kicks of
    +-hbar k_L that shift the class intensity downstream.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from . import constants as const
from .core import BeamSource, Particle, VelocityDistribution, de_broglie_wavelength
from .errors import DomainError, ResolutionError
from .material import NanoGrating, eikonal_transmission
from .optical import (
    GratingInteraction,
    OpticalGrating,
    absorption_parameter,
    incoherent_class_amplitude,
    phase_parameter,
    photon_class_transmission,
)
from .parallel import ordered_sum, pmap
from .propagation import Grid, transfer_function

logger = logging.getLogger(__name__)

__all__ = [
    "KdtliConfig",
    "FringeScan",
    "VisibilityCurve",
    "fringe_scan",
    "sinusoidal_visibility",
    "fringe_phase",
    "visibility_curve",
    "scaled_length",
    "velocity_for_scaled_length",
]

Model = Literal["phase_only", "incoherent_absorption", "coherent_absorption"]
MODELS = ("phase_only", "incoherent_absorption", "coherent_absorption")
PERIOD_TOLERANCE = 50e-6


@dataclass(frozen=True)
class KdtliConfig:
    """Interferometer geometry, particle and numerical resolution.

    ``phi0`` and ``n0`` override the values derived from the laser and the
    particle; they are then held fixed for every velocity. ``g2_offset`` moves
    the light grating, ``global_offset`` moves all three gratings together.
    """

    g1: NanoGrating
    g2: OpticalGrating
    g3: NanoGrating
    particle: Particle
    source: BeamSource
    L: float = 0.105
    model: Model = "coherent_absorption"
    n_source_points: int = 64
    n_source_slits: int = 8
    velocity_quadrature: int = 1
    phi0: Optional[float] = None
    n0: Optional[float] = None
    g2_offset: float = 0.0
    global_offset: float = 0.0
    n_periods: int = 64
    samples_per_period: int = 256
    n_offsets: int = 64

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if not self.L > 0:
            raise DomainError("inter-grating distance L must be positive")
        d = self.period
        for name, g in (("g1", self.g1), ("g3", self.g3)):
            mismatch = abs(g.period - d) / d
            if mismatch > PERIOD_TOLERANCE:
                raise DomainError(
                    f"{name} period {g.period:.6e} m differs from the light-grating period "
                    f"{d:.6e} m by {mismatch * 1e6:.1f} ppm (> 50 ppm)"
                )
            if mismatch > 0:
                logger.info("%s period deviates by %.2f ppm from lambda_L/2", name, mismatch * 1e6)
        if self.n_source_slits < 1 or self.n_source_points < self.n_source_slits:
            raise DomainError("need at least one source point per sampled slit")
        if self.n_source_slits > self.n_periods:
            raise DomainError("more source slits than periods in the window")
        if self.n_offsets < 16 or self.samples_per_period % self.n_offsets:
            raise ResolutionError("n_offsets must be >= 16 and divide samples_per_period")
        if self.velocity_quadrature < 1:
            raise DomainError("velocity_quadrature must be at least 1")

    @property
    def period(self) -> float:
        return self.g2.period

    @property
    def period_mismatch_ppm(self) -> float:
        d = self.period
        return 1e6 * max(abs(self.g1.period - d), abs(self.g3.period - d)) / d

    def interaction(self, v: float) -> GratingInteraction:
        phi0 = self.phi0 if self.phi0 is not None else phase_parameter(self.g2, self.particle, v)
        if self.model == "phase_only":
            n0 = 0.0
        else:
            n0 = self.n0 if self.n0 is not None else absorption_parameter(self.g2, self.particle, v)
        return GratingInteraction(float(phi0), float(n0), mode=self.g2.mode)


@dataclass
class FringeScan:
    """Counts behind G3 versus its offset over one period (probability per incident molecule)."""

    offsets: np.ndarray
    counts: np.ndarray
    period: float
    l_over_lt: float
    velocity: Optional[float] = None
    velocity_marginal: Optional[np.ndarray] = None


@dataclass
class VisibilityCurve:
    x_axis: np.ndarray
    visibility: np.ndarray
    model: str
    velocities: np.ndarray = field(default_factory=lambda: np.zeros(0))
    phase: np.ndarray = field(default_factory=lambda: np.zeros(0))


def scaled_length(L: float, d: float, mass: float, v) -> np.ndarray:
    """L / L_T = L lambda_dB / d^2 = L h / (m v d^2)."""
    return L * const.h / (mass * const.amu * np.asarray(v, dtype=float) * d * d)


def velocity_for_scaled_length(L: float, d: float, mass: float, l_over_lt) -> np.ndarray:
    return L * const.h / (mass * const.amu * np.asarray(l_over_lt, dtype=float) * d * d)


def _resolved_grid(config: KdtliConfig, inter: GratingInteraction) -> Grid:
    """Window grid, refined until G2's highest populated order sits below Nyquist/4."""
    spp = config.samples_per_period
    while True:
        # j_max photons widen the spectrum by at most j_max half-orders of 1/d
        u = (np.arange(2 * spp) + 0.5) / spp
        t = photon_class_transmission(inter, max(inter.classes), u * config.period,
                                      math.pi / config.period)
        t0 = photon_class_transmission(inter, 0, u * config.period, math.pi / config.period)
        power = np.abs(np.fft.fft(t)) ** 2 + np.abs(np.fft.fft(t0)) ** 2
        k = np.abs(np.fft.fftfreq(2 * spp, 1.0 / (2 * spp)))
        populated = k[power > 1e-14 * power.sum()].max()
        if populated < spp / 4:  # Nyquist of the 2d window is spp half-orders
            break
        spp *= 2
        if spp > 2**14:
            raise ResolutionError("G2 spectrum is not resolvable with <= 2^14 samples per period")
    if spp != config.samples_per_period:
        logger.info("raised samples per period to %d to resolve G2 orders", spp)
    return Grid(spp * config.n_periods, config.period, config.n_periods)


def _source_points(config: KdtliConfig) -> list[float]:
    d, s = config.period, config.g1.slit_width
    per_slit = config.n_source_points // config.n_source_slits
    stride = config.n_periods // config.n_source_slits
    width = s / per_slit
    points = []
    for k in range(config.n_source_slits):
        left = (k * stride) * d + 0.5 * (d - s) + config.global_offset
        points.extend(left + (p + 0.5) * width for p in range(per_slit))
    return points


def _window_intensity(config: KdtliConfig, v: float, workers: Optional[int]) -> tuple[np.ndarray, Grid, float]:
    lam = de_broglie_wavelength(config.particle.mass, v)
    inter = config.interaction(v)
    grid = _resolved_grid(config, inter)
    d = config.period
    x = grid.x
    k_L = config.g2.k_L
    x2 = x - config.g2_offset - config.global_offset
    if config.model == "incoherent_absorption":
        g2_masks = [incoherent_class_amplitude(inter, j, x2, k_L) for j in inter.classes]
    else:
        g2_masks = [photon_class_transmission(inter, j, x2, k_L) for j in inter.classes]

    g1 = eikonal_transmission(config.g1, v, Grid(grid.n, d, config.n_periods)) \
        if config.g1.c3 > 0 else None
    if g1 is not None and config.global_offset:
        g1 = np.roll(g1, int(round(config.global_offset / grid.pitch)))
    kernel = transfer_function(grid, lam, config.L)
    q = grid.frequencies
    kick = None
    if config.model == "incoherent_absorption":
        # one photon recoil hbar k_L displaces the pattern by lambda_dB L / lambda_L
        kick = np.cos(2 * math.pi * q * lam * config.L / config.g2.wavelength)

    width = config.g1.slit_width * config.n_source_slits / config.n_source_points
    half = 0.5 * width

    def emitter(x0):
        dist = (x - x0 + 0.5 * grid.window) % grid.window - 0.5 * grid.window
        psi = (np.abs(dist) < half).astype(complex)
        if g1 is not None:
            psi *= g1
        spectrum = np.fft.fft(psi) * kernel
        at_g2 = np.fft.ifft(spectrum)
        intensity = np.zeros(grid.n)
        for j, mask in zip(inter.classes, g2_masks):
            out = np.fft.ifft(np.fft.fft(at_g2 * mask) * kernel)
            if kick is not None and j:
                intensity += np.fft.ifft(np.fft.fft(np.abs(out) ** 2) * kick**j).real
            else:
                intensity += np.abs(out) ** 2
        return intensity

    total = ordered_sum(pmap(emitter, _source_points(config), workers))
    # probability per molecule incident on the sampled slits' periods
    total *= grid.pitch / (config.n_source_slits * d)
    return total, grid, lam


def _scan_from_intensity(config: KdtliConfig, intensity: np.ndarray, grid: Grid, v: float) -> np.ndarray:
    mask = np.abs(eikonal_transmission(config.g3, v, Grid(grid.n, config.period, config.n_periods))) ** 2
    shift = int(round(config.global_offset / grid.pitch))
    if shift:
        mask = np.roll(mask, shift)
    corr = np.fft.ifft(np.fft.fft(intensity) * np.conj(np.fft.fft(mask))).real
    step = grid.samples_per_period // config.n_offsets
    return np.clip(corr[: grid.samples_per_period : step], 0.0, None)


def fringe_scan(config: KdtliConfig, v: float, workers: Optional[int] = None) -> FringeScan:
    """Counts transmitted through G3 for ``n_offsets`` offsets across one period.

    ``v`` is the velocity for a single-velocity scan. With
    ``velocity_quadrature > 1`` the scan is averaged over Gauss-Legendre nodes
    of the source's distribution rescaled to mean ``v``.
    """
    if not v > 0:
        raise DomainError("velocity must be positive")
    nodes, weights = _velocity_nodes(config, v)
    scans = []
    for vi in nodes:
        intensity, grid, _ = _window_intensity(config, vi, workers)
        scans.append(_scan_from_intensity(config, intensity, grid, vi))
    counts = ordered_sum(w * s for w, s in zip(weights, scans))
    d = config.period
    offsets = np.arange(config.n_offsets) * d / config.n_offsets
    return FringeScan(
        offsets=offsets,
        counts=counts,
        period=d,
        l_over_lt=float(scaled_length(config.L, d, config.particle.mass, v)),
        velocity=v,
        velocity_marginal=np.array(scans) if len(scans) > 1 else None,
    )


def _velocity_nodes(config: KdtliConfig, v: float) -> tuple[np.ndarray, np.ndarray]:
    dist = config.source.velocity
    if config.velocity_quadrature == 1 or dist.is_degenerate:
        return np.array([v]), np.array([1.0])
    scale = v / dist.mean()
    scaled = VelocityDistribution(dist.kind, dist.v_mean * scale, dist.v_spread * scale)
    return scaled.quadrature(config.velocity_quadrature)


def _harmonics(scan: FringeScan) -> np.ndarray:
    counts = np.asarray(scan.counts, dtype=float)
    if counts.size < 16:
        raise ResolutionError("visibility needs at least 16 offsets over one period")
    return np.fft.fft(counts) / counts.size


def sinusoidal_visibility(scan: FringeScan) -> float:
    """V = 2 |a1| / a0 from the discrete Fourier coefficients of the scan."""
    a = _harmonics(scan)
    if a[0].real <= 0:
        raise DomainError("fringe scan carries no signal; visibility is undefined")
    return float(2 * abs(a[1]) / a[0].real)


def fringe_phase(scan: FringeScan) -> float:
    """Phase of the first harmonic of the scan, rad."""
    return float(np.angle(_harmonics(scan)[1]))


def visibility_curve(config: KdtliConfig, v_grid, workers: Optional[int] = None) -> VisibilityCurve:
    """Fringe visibility for each velocity, with x axis L / L_T."""
    v_grid = np.asarray(v_grid, dtype=float)
    if np.any(v_grid <= 0):
        raise DomainError("velocities must be positive")
    if np.any(np.diff(v_grid) < 0):
        raise DomainError("velocity grid must be sorted")
    scans = pmap(lambda v: fringe_scan(config, v, workers=1), list(v_grid), workers)
    return VisibilityCurve(
        x_axis=scaled_length(config.L, config.period, config.particle.mass, v_grid),
        visibility=np.array([sinusoidal_visibility(s) for s in scans]),
        model=config.model,
        velocities=v_grid,
        phase=np.array([fringe_phase(s) for s in scans]),
    )
