"""Nanomechanical gratings with Casimir-Polder wall attraction.

Molecules crossing a slit on a straight line pick up the eikonal phase of the
van der Waals potential -C3/x^3 of both walls. Close to a wall the phase
diverges; everything within the cutoff distance ``wall_cutoff`` is treated as
lost.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np
from scipy import integrate, optimize

from . import constants as const
from .core import BeamSource, de_broglie_wavelength
from .errors import DomainError, FitError, QuadratureError, ResolutionError
from .parallel import pmap
from .propagation import Grid

logger = logging.getLogger(__name__)

__all__ = [
    "KickModel",
    "NanoGrating",
    "DiffractionPattern",
    "Screen",
    "DetectorImage",
    "c3_from_spectra",
    "wall_phase",
    "auto_wall_cutoff",
    "eikonal_transmission",
    "far_field_orders",
    "effective_slit_width",
    "width_for_c3",
    "calibrate_c3",
    "detector_image",
    "dephasing_sample",
]

DEFAULT_SAMPLES = 2**14
CUTOFF_PHASE = 2 * math.pi * 10


@dataclass(frozen=True)
class KickModel:
    """Random per-molecule phase kick, ``kick_std`` in rad per grating period."""

    kick_std: float
    distribution: Literal["gaussian", "uniform"] = "gaussian"

    def __post_init__(self):
        if self.kick_std < 0:
            raise DomainError("kick_std must be non-negative")
        if self.distribution not in ("gaussian", "uniform"):
            raise DomainError(f"unknown kick distribution {self.distribution!r}")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.distribution == "gaussian":
            return rng.normal(0.0, self.kick_std, size)
        half = math.sqrt(3.0) * self.kick_std
        return rng.uniform(-half, half, size)


@dataclass(frozen=True)
class NanoGrating:
    """Material grating: period ``d``, slit width ``s`` and thickness ``b`` in m.

    ``c3`` is the particle-wall van der Waals coefficient in J m^3. With
    ``wall_cutoff=None`` the cutoff is placed where the single-wall eikonal
    phase reaches 20 pi (see :func:`auto_wall_cutoff`).
    """

    period: float
    slit_width: float
    thickness: float
    c3: float = 0.0
    wall_cutoff: Optional[float] = None
    charge_dephasing: Optional[KickModel] = None

    def __post_init__(self):
        if not 0 < self.slit_width < self.period:
            raise DomainError(f"slit width must lie in (0, period), got {self.slit_width!r}")
        if not self.thickness > 0:
            raise DomainError("grating thickness must be positive")
        if self.c3 < 0:
            raise DomainError("c3 must be non-negative")
        if self.wall_cutoff is not None and not 0 < self.wall_cutoff < 0.5 * self.slit_width:
            raise DomainError("wall_cutoff must lie in (0, slit_width / 2)")

    @property
    def open_fraction(self) -> float:
        return self.slit_width / self.period


def c3_from_spectra(
    alpha_spectrum: Callable[[float], float],
    reflection_spectrum: Callable[[float], float],
    omega_max: float,
    rtol: float = 1e-8,
) -> float:
    """C3 = hbar / (16 pi^2 eps0) * int_0^omega_max alpha(w) r(w) dw.

    ``alpha_spectrum`` returns polarizability volumes in cubic angstrom and
    is converted to SI before integration. The integral runs over real
    frequencies on [0, omega_max].
    """
    if not omega_max > 0:
        raise DomainError("omega_max must be positive")

    def integrand(w):
        return const.polarizability_si(alpha_spectrum(w)) * reflection_spectrum(w)

    value, abserr, info = integrate.quad(
        integrand, 0.0, omega_max, epsabs=0.0, epsrel=rtol, limit=500, full_output=True
    )[:3]
    if abserr > max(rtol * abs(value), 1e-300) or info.get("ier", 0) not in (0, None):
        raise QuadratureError(
            f"C3 integral did not converge: value={value:.6e}, abserr={abserr:.3e}, "
            f"evaluations={info['neval']}"
        )
    return const.hbar / (16 * math.pi**2 * const.epsilon_0) * value


def wall_phase(c3, thickness, v_z, distance):
    """Eikonal phase C3 b / (hbar v x^3) picked up at ``distance`` from one wall."""
    return c3 * thickness / (const.hbar * v_z * np.asarray(distance, dtype=float) ** 3)


def auto_wall_cutoff(grating: NanoGrating, v_z: float) -> float:
    """Wall distance at which the single-wall phase equals 20 pi; 0 without interaction."""
    if grating.wall_cutoff is not None:
        return grating.wall_cutoff
    if grating.c3 == 0:
        return 0.0
    cut = (grating.c3 * grating.thickness / (const.hbar * v_z * CUTOFF_PHASE)) ** (1.0 / 3.0)
    return min(cut, 0.5 * grating.slit_width)


def eikonal_transmission(grating: NanoGrating, v_z: float, grid: Grid) -> np.ndarray:
    """Complex transmission of the grating sampled on ``grid``.

    Zero on the bars and within the wall cutoff; elsewhere
    exp(i C3 b / (hbar v) (1/x_L^3 + 1/x_R^3)) with x_L, x_R the distances to
    the two walls of the slit. Slits are centred at (k + 1/2) d.
    """
    if not v_z > 0:
        raise DomainError("v_z must be positive")
    if not math.isclose(grid.period, grating.period, rel_tol=1e-12):
        raise ResolutionError("grid period does not match grating period")
    cut = auto_wall_cutoff(grating, v_z)
    if 0 < cut < 0.5 * grating.slit_width and cut < 8 * grid.pitch:
        raise ResolutionError(
            f"wall cutoff {cut:.3e} m is resolved by fewer than 8 samples (pitch {grid.pitch:.3e} m)"
        )
    d, s = grating.period, grating.slit_width
    u = np.mod(grid.x, d)
    x_left = u - 0.5 * (d - s)
    x_right = 0.5 * (d + s) - u
    is_open = (x_left > cut) & (x_right > cut)
    t = np.zeros(grid.n, dtype=complex)
    if grating.c3 == 0:
        t[is_open] = 1.0
        return t
    strength = grating.c3 * grating.thickness / (const.hbar * v_z)
    phase = strength * (x_left[is_open] ** -3 + x_right[is_open] ** -3)
    t[is_open] = np.exp(1j * phase)
    return t


@dataclass(frozen=True)
class DiffractionPattern:
    """Far-field order amplitudes of one grating period.

    ``transmitted`` is the total probability passed by the grating,
    int |t|^2 dx / d, which equals the sum over all diffraction orders.
    """

    n: np.ndarray
    amplitude: np.ndarray
    angle: np.ndarray
    transmitted: float

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def envelope(self, theta: np.ndarray, period: float, lambda_dB: float) -> np.ndarray:
        """Order intensities re-sampled as a function of diffraction angle."""
        order = theta * period / lambda_dB
        return np.interp(order, self.n, self.intensity, left=0.0, right=0.0)


def _order_amplitudes(transmission: np.ndarray) -> np.ndarray:
    """Fourier-series coefficients of the piecewise-constant (cell-held) transmission."""
    N = transmission.size
    coeffs = np.fft.fft(transmission) / N
    k = np.fft.fftfreq(N, 1.0 / N)
    return coeffs * np.exp(-1j * np.pi * k / N) * np.sinc(k / N)


def far_field_orders(transmission, d: float, lambda_dB: float, n_max: int = 30) -> DiffractionPattern:
    """Order amplitudes c_n = (1/d) int t(x) exp(-2 pi i n x / d) dx for |n| <= n_max.

    ``transmission`` holds one period of cell values; each sample is treated
    as constant across its cell so hard slit edges are integrated exactly.
    """
    t = np.asarray(transmission, dtype=complex)
    N = t.size
    if 2 * n_max >= N:
        raise ResolutionError(f"n_max={n_max} is beyond the Nyquist order of {N} samples")
    amps = _order_amplitudes(t)
    n = np.arange(-n_max, n_max + 1)
    return DiffractionPattern(
        n=n,
        amplitude=amps[n],
        angle=n * lambda_dB / d,
        transmitted=float(np.mean(np.abs(t) ** 2)),
    )


def _slit_envelope(n, w, d):
    return np.sinc(n * w / d) ** 2


def effective_slit_width(pattern: DiffractionPattern, d: float, rtol: float = 1e-4) -> float:
    """Width of the binary slit whose envelope A sinc^2(n w / d) best fits the orders.

    The amplitude A is profiled out in closed form; w is found by a coarse
    scan over (0, d) followed by bounded Brent refinement.
    """
    intensity = pattern.intensity
    n = pattern.n.astype(float)
    if np.count_nonzero(intensity > 1e-9 * intensity.max()) < 5:
        raise FitError("effective width needs at least five populated diffraction orders")

    def residual(w):
        model = _slit_envelope(n, w, d)
        amp = np.dot(intensity, model) / np.dot(model, model)
        return float(np.sum((intensity - amp * model) ** 2))

    grid = np.linspace(0.002, 0.998, 500) * d
    values = np.array([residual(w) for w in grid])
    k = int(np.argmin(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = optimize.minimize_scalar(
        residual, bounds=(lo, hi), method="bounded", options={"xatol": rtol * 1e-2 * grid[k]}
    )
    return float(res.x)


def width_for_c3(grating: NanoGrating, v_z: float, lambda_dB: float, c3: float,
                 n_samples: int = DEFAULT_SAMPLES, n_max: int = 30) -> float:
    g = NanoGrating(grating.period, grating.slit_width, grating.thickness, c3, grating.wall_cutoff)
    t = eikonal_transmission(g, v_z, Grid(n_samples, g.period))
    if not np.any(t):
        # the wall cutoff has closed the whole slit
        return 0.0
    return effective_slit_width(far_field_orders(t, g.period, lambda_dB, n_max), g.period)


def calibrate_c3(grating: NanoGrating, mass: float, v_z: float, target_width: float,
                 n_samples: int = DEFAULT_SAMPLES, n_max: int = 30,
                 c3_bracket: tuple[float, float] = (1e-52, 1e-45)) -> float:
    """C3 value (J m^3) for which the fitted effective width equals ``target_width``.

    Brent root finding in log C3 inside ``c3_bracket``.
    """
    lam = de_broglie_wavelength(mass, v_z)

    def f(log_c3):
        return width_for_c3(grating, v_z, lam, math.exp(log_c3), n_samples, n_max) - target_width

    lo, hi = math.log(c3_bracket[0]), math.log(c3_bracket[1])
    if f(lo) * f(hi) > 0:
        raise FitError(f"target width {target_width:.3e} m is not bracketed by C3 in {c3_bracket}")
    return math.exp(optimize.brentq(f, lo, hi, xtol=1e-10, rtol=1e-10))


@dataclass(frozen=True)
class Screen:
    """Detector pixel geometry. x is centred on the undeflected beam, y is the drop."""

    nx: int
    ny: int
    x_pitch: float
    y_pitch: float
    x_center: float = 0.0
    y_top: float = 0.0

    @property
    def x_edges(self) -> np.ndarray:
        return self.x_center + (np.arange(self.nx + 1) - 0.5 * self.nx) * self.x_pitch

    @property
    def y_edges(self) -> np.ndarray:
        return self.y_top + np.arange(self.ny + 1) * self.y_pitch


@dataclass
class DetectorImage:
    """Arrival probability per pixel; row index grows with gravitational drop."""

    grid: np.ndarray
    x_pitch: float
    y_pitch: float
    L1: float
    L2: float
    transmitted: float
    clipped_mass: float = 0.0
    row_velocity: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def total(self) -> float:
        return float(self.grid.sum())


def gravity_drop(v, L1, L2, gravity=const.g):
    """Vertical fall 1/2 g ((L1 + L2) / v)^2 between source and screen."""
    return 0.5 * gravity * ((L1 + L2) / np.asarray(v, dtype=float)) ** 2


def _tophat_deposit(centers, weights, width, edges):
    """Mass of unit top-hats of ``width`` at ``centers`` falling in each pixel."""
    order = np.argsort(centers, kind="stable")
    xs, ws = centers[order], weights[order]
    cw = np.concatenate(([0.0], np.cumsum(ws)))
    cwx = np.concatenate(([0.0], np.cumsum(ws * xs)))

    def ramp_integral(x):
        # int_{-inf}^{x} sum_n w_n H(t - x_n) dt
        idx = np.searchsorted(xs, x, side="right")
        return x * cw[idx] - cwx[idx]

    left_mass = (ramp_integral(edges + 0.5 * width) - ramp_integral(edges - 0.5 * width)) / width
    return np.diff(left_mass)


def detector_image(grating: NanoGrating, mass: float, source: BeamSource, L2: float,
                   screen: Screen, n_velocities: int = 64, n_samples: int = DEFAULT_SAMPLES,
                   gravity: float = const.g, workers: Optional[int] = None) -> DetectorImage:
    """Gravity-sorted far-field image behind a material grating.

    Each velocity class deposits every diffraction order of the sampled
    transmission at x = n lambda L2 / d, smeared by the projected source width
    D L2 / L1, into the pixel row of its drop 1/2 g ((L1+L2)/v)^2. Classes are
    weighted by the velocity distribution.
    """
    L1 = source.distance_to_first_element
    v_nodes, v_weights = source.velocity.quadrature(n_velocities)
    grid = Grid(n_samples, grating.period)
    smear = source.source_width * L2 / L1
    x_edges, y_edges = screen.x_edges, screen.y_edges

    def one_velocity(v):
        lam = de_broglie_wavelength(mass, v)
        t = eikonal_transmission(grating, v, grid)
        power = np.abs(np.fft.fft(t) / grid.n) ** 2
        n = np.fft.fftfreq(grid.n, 1.0 / grid.n)
        row_mass = _tophat_deposit(n * lam * L2 / grating.period, power, smear, x_edges)
        return float(power.sum()), row_mass

    results = pmap(one_velocity, list(v_nodes), workers)
    image = np.zeros((screen.ny, screen.nx))
    row_velocity = np.full(screen.ny, np.nan)
    transmitted = 0.0
    for v, w, (total, row_mass) in zip(v_nodes, v_weights, results):
        transmitted += w * total
        y = gravity_drop(v, L1, L2, gravity)
        row = int(np.searchsorted(y_edges, y, side="right")) - 1
        if 0 <= row < screen.ny:
            image[row] += w * row_mass
            row_velocity[row] = v
    clipped = transmitted - image.sum()
    if clipped > 1e-6 * max(transmitted, 1e-300):
        logger.warning("detector screen clips %.3e of the transmitted probability", clipped)
    return DetectorImage(image, screen.x_pitch, screen.y_pitch, L1, L2, transmitted,
                         max(clipped, 0.0), row_velocity)


def dephasing_sample(intensity, pitch: float, fringe_period: float, kick_model: KickModel,
                     n_molecules: int, seed: int) -> np.ndarray:
    """Incoherent average of a screen pattern over random per-molecule shifts.

    A phase kick of ``phi`` rad per grating period deflects a molecule by
    phi / (2 pi) fringe periods at the screen. The pattern is treated as
    periodic over its sample window and shifted exactly in Fourier space.
    """
    intensity = np.asarray(intensity, dtype=float)
    if kick_model.kick_std == 0:
        return intensity.copy()
    rng = np.random.default_rng(seed)
    shifts = kick_model.draw(rng, n_molecules) * fringe_period / (2 * math.pi)
    q = np.fft.rfftfreq(intensity.size, pitch)
    # chunked to bound memory for large molecule counts
    response = np.zeros(q.size, dtype=complex)
    for chunk in np.array_split(shifts, max(1, n_molecules // 4096)):
        response += np.exp(-2j * math.pi * np.outer(chunk, q)).sum(axis=0)
    response /= n_molecules
    return np.fft.irfft(np.fft.rfft(intensity) * response, n=intensity.size)
