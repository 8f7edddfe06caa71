"""Absorption cross sections from recoil-induced fringe-visibility reduction.

A running laser beam crosses the interferometer at distance D behind G1. A
molecule that absorbs a photon keeps its coherence but its interferogram is
displaced by s = lambda_dB D / lambda_K. With a Poisson number of absorbed
photons of mean n0 the fringe visibility is multiplied by

    R = |exp(-n0 (1 - exp(2 pi i s / d)))|

and the velocity average takes the modulus outside the integral over P(v).
Because n0 is proportional to the cross section, fitting R(D) yields sigma.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core import Particle, VelocityDistribution, de_broglie_wavelength
from .errors import DomainError, FitError
from .optical import OpticalGrating, absorption_parameter

logger = logging.getLogger(__name__)

__all__ = [
    "RecoilScanConfig",
    "ReductionMeasurement",
    "FitResult",
    "reduction_single_velocity",
    "velocity_averaged_reduction",
    "averaged_reduction",
    "simulate_reduction_scan",
    "fit_cross_section",
    "model_reduction",
    "format_fit_report",
]


@dataclass(frozen=True)
class RecoilScanConfig:
    """Running-beam geometry.

    ``D`` is the distance of the beam from G1, ``L`` the grating separation,
    ``d`` the fringe period. ``n0`` fixes the mean photon number for every
    velocity instead of deriving it from the laser parameters.
    """

    D: float
    lambda_K: float
    power: float
    w_y: float
    d: float
    velocity: VelocityDistribution
    L: float = 0.105
    n0: Optional[float] = None

    def __post_init__(self):
        if not self.lambda_K > 0 or not self.d > 0 or not self.w_y > 0:
            raise DomainError("lambda_K, d and w_y must be positive")
        if not 0 <= self.D < 2 * self.L:
            raise DomainError(f"laser position D={self.D!r} must lie in [0, 2L)")
        if self.power < 0:
            raise DomainError("laser power must be non-negative")

    @property
    def beam(self) -> OpticalGrating:
        return OpticalGrating(self.lambda_K, self.power, self.w_y, self.w_y)

    def mean_photons(self, particle: Particle, v):
        if self.n0 is not None:
            return np.full(np.shape(v), float(self.n0))[()]
        return absorption_parameter(self.beam, particle, v)

    def displacement(self, particle: Particle, v):
        return de_broglie_wavelength(particle.mass, v) * self.D / self.lambda_K


CONTROL_COLUMNS = {"D": "control_m", "power": "control_W"}


@dataclass
class ReductionMeasurement:
    """Visibility reduction factors measured at a series of control values.

    ``kind`` names the scanned quantity: the laser position ``D`` in metres
    or the laser ``power`` in watts.
    """

    control: np.ndarray
    R: np.ndarray
    R_sigma: np.ndarray
    kind: str = "D"

    def __post_init__(self):
        if self.kind not in CONTROL_COLUMNS:
            raise DomainError(f"unknown control kind {self.kind!r}")
        self.control = np.asarray(self.control, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        self.R_sigma = np.asarray(self.R_sigma, dtype=float)
        if not self.control.shape == self.R.shape == self.R_sigma.shape:
            raise DomainError("control, R and R_sigma must have equal length")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([CONTROL_COLUMNS[self.kind], "R", "R_sigma"])
            for row in zip(self.control, self.R, self.R_sigma):
                writer.writerow([format(float(x), ".17g") for x in row])

    @classmethod
    def from_csv(cls, path) -> "ReductionMeasurement":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            kinds = {col: k for k, col in CONTROL_COLUMNS.items()}
            if header is None or len(header) != 3 or header[0] not in kinds or header[1:] != ["R", "R_sigma"]:
                raise DomainError(f"{path}: expected header control_m|control_W,R,R_sigma, got {header}")
            try:
                rows = [tuple(float(x) for x in r) for r in reader if r]
            except ValueError as exc:
                raise DomainError(f"{path}: {exc}") from None
        if not rows or any(len(r) != 3 for r in rows):
            raise DomainError(f"{path}: need rows of three numbers")
        control, R, sigma = map(np.array, zip(*rows))
        return cls(control, R, sigma, kinds[header[0]])


def reduction_single_velocity(n0, s, d):
    """exp(-n0 (1 - cos(2 pi s / d))), the modulus of the single-velocity factor."""
    if np.any(np.asarray(n0) < 0) or not d > 0:
        raise DomainError("need n0 >= 0 and d > 0")
    return np.exp(-np.asarray(n0) * (1.0 - np.cos(2 * math.pi * np.asarray(s) / d)))[()]


def velocity_averaged_reduction(velocity: VelocityDistribution, n0_of_v: Callable, s_of_v: Callable,
                                d: float, rtol: float = 1e-8) -> float:
    """|int dv P(v) exp(-n0(v) (1 - exp(2 pi i s(v) / d)))|."""

    def integrand(v):
        return np.exp(-n0_of_v(v) * (1.0 - np.exp(2j * math.pi * s_of_v(v) / d)))

    return float(abs(velocity.integrate(integrand, rtol=rtol)))


def averaged_reduction(config: RecoilScanConfig, particle: Particle, rtol: float = 1e-8) -> float:
    """Velocity-averaged reduction factor for one laser position."""
    if config.velocity.is_degenerate:
        v = config.velocity.v_mean
        return float(reduction_single_velocity(config.mean_photons(particle, v),
                                               config.displacement(particle, v), config.d))
    return velocity_averaged_reduction(
        config.velocity,
        lambda v: config.mean_photons(particle, v),
        lambda v: config.displacement(particle, v),
        config.d,
        rtol,
    )


def _scan_configs(config: RecoilScanConfig, values: np.ndarray, control: str) -> list[RecoilScanConfig]:
    if control == "D":
        if np.any(values <= 0) or np.any(values >= 2 * config.L):
            raise DomainError("scan positions must lie inside (0, 2L)")
        return [replace(config, D=float(x)) for x in values]
    if control == "power":
        if np.any(values < 0):
            raise DomainError("scan powers must be non-negative")
        if config.n0 is not None:
            raise DomainError("a power scan needs n0 derived from the laser, not fixed")
        return [replace(config, power=float(x)) for x in values]
    raise DomainError(f"unknown control kind {control!r}")


def simulate_reduction_scan(config: RecoilScanConfig, values, particle: Particle,
                            noise_std: float = 0.0, seed: int = 0, control: str = "D") -> ReductionMeasurement:
    """Model R over a scan of laser positions (``control="D"``) or powers.

    Noise is multiplicative Gaussian with relative std ``noise_std``;
    ``R_sigma`` reports ``noise_std * R_true``.
    """
    values = np.asarray(values, dtype=float)
    R_true = np.array([averaged_reduction(c, particle) for c in _scan_configs(config, values, control)])
    if noise_std == 0:
        return ReductionMeasurement(values, R_true, np.zeros_like(R_true), control)
    rng = np.random.default_rng(seed)
    R = R_true * (1.0 + noise_std * rng.standard_normal(R_true.size))
    return ReductionMeasurement(values, R, noise_std * R_true, control)


class _ReductionModel:
    """R(sigma; x_i) for a whole scan at once on fixed Gauss-Legendre nodes."""

    def __init__(self, config: RecoilScanConfig, particle: Particle, controls: np.ndarray,
                 kind: str = "D", n_nodes: int = 160):
        vel = config.velocity
        if vel.is_degenerate:
            v, w = np.array([vel.v_mean]), np.array([1.0])
        else:
            lo, hi = vel.support()
            x, gw = np.polynomial.legendre.leggauss(n_nodes)
            v = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            w = 0.5 * (hi - lo) * gw * vel.pdf(v)
        self.w = w
        unit = replace(particle, sigma_abs=1.0)
        self.n0_per_sigma = config.mean_photons(unit, v) if config.n0 is None else None
        self.fixed_n0 = config.n0
        lam = de_broglie_wavelength(particle.mass, v)
        if kind == "D":
            D = np.asarray(controls, dtype=float)
        else:
            D = np.array([config.D])
            if self.n0_per_sigma is not None:
                if not config.power > 0:
                    raise FitError("a power scan needs a positive reference power in the config")
                self.n0_per_sigma = np.outer(np.asarray(controls) / config.power, self.n0_per_sigma)
        self.phase = np.exp(2j * math.pi * np.outer(D, lam) / (config.lambda_K * config.d))

    def __call__(self, sigma: float) -> np.ndarray:
        if self.n0_per_sigma is None:
            n0 = self.fixed_n0
        else:
            n0 = self.n0_per_sigma * sigma
        return np.abs((np.exp(-n0 * (1.0 - self.phase)) * self.w).sum(axis=1))


def model_reduction(data: ReductionMeasurement, config: RecoilScanConfig, particle: Particle,
                    sigma_abs: float) -> np.ndarray:
    """Model R at the control values of ``data`` for a given cross section."""
    return _ReductionModel(config, particle, data.control, data.kind)(sigma_abs)


@dataclass
class FitResult:
    sigma_abs: float
    sigma_uncertainty: float
    residual_norm: float
    chi2: float
    history: list = field(default_factory=list)


def fit_cross_section(data: ReductionMeasurement, config: RecoilScanConfig, particle: Particle,
                      sigma_range: tuple[float, float] = (1e-26, 1e-16), rtol: float = 1e-6) -> FitResult:
    """Least-squares absorption cross section from a reduction scan.

    The scan control (laser position or power) is taken from ``data.kind``;
    for a power scan the laser sits at ``config.D``.

    Minimizes chi^2 = sum((R_model(sigma; D_i) - R_i) / R_sigma_i)^2 in
    log(sigma): a logarithmic scan of ``sigma_range`` brackets the minimum,
    golden-section search refines it to relative tolerance ``rtol``. The
    uncertainty follows from the chi^2 curvature, delta(log sigma) =
    sqrt(2 / chi2'').

    ``history`` holds the best chi^2 after every bracketing iteration; it is
    non-increasing by construction.
    """
    if data.R.size < 5:
        raise FitError("need at least five data points")
    if np.any(data.R <= 0) or np.any(data.R_sigma <= 0):
        raise FitError("R values and their uncertainties must be positive")
    if config.n0 is not None:
        raise FitError("a fixed n0 leaves the cross section unidentifiable")
    model = _ReductionModel(config, particle, data.control, data.kind)

    def chi2(log_sigma):
        r = (model(math.exp(log_sigma)) - data.R) / data.R_sigma
        return float(r @ r)

    grid = np.linspace(math.log(sigma_range[0]), math.log(sigma_range[1]), 81)
    values = np.array([chi2(x) for x in grid])
    k = int(np.argmin(values))
    if k == 0 or k == grid.size - 1:
        raise FitError(
            f"chi^2 minimum lies on the edge of sigma_range {sigma_range}; "
            "the data do not constrain the cross section"
        )
    if values.max() - values[k] < 1.0:
        raise FitError("chi^2 is flat over sigma_range; the data carry no absorption signal")

    invphi = (math.sqrt(5) - 1) / 2
    a, b = grid[k - 1], grid[k + 1]
    c, e = b - invphi * (b - a), a + invphi * (b - a)
    fc, fe = chi2(c), chi2(e)
    history = [values[k]]
    while b - a > rtol:
        if fc < fe:
            b, e, fe = e, c, fc
            c = b - invphi * (b - a)
            fc = chi2(c)
        else:
            a, c, fc = c, e, fe
            e = a + invphi * (b - a)
            fe = chi2(e)
        history.append(min(history[-1], fc, fe))
    x0 = c if fc < fe else e
    f0 = min(fc, fe)
    h = 1e-3
    curvature = (chi2(x0 + h) - 2 * f0 + chi2(x0 - h)) / (h * h)
    if not curvature > 0:
        raise FitError("chi^2 has no curvature at the optimum; cross section is unconstrained")
    sigma = math.exp(x0)
    residual = model(sigma) - data.R
    logger.debug("fit converged after %d iterations, chi2=%.6g", len(history) - 1, f0)
    return FitResult(
        sigma_abs=sigma,
        sigma_uncertainty=sigma * math.sqrt(2.0 / curvature),
        residual_norm=float(np.linalg.norm(residual)),
        chi2=f0,
        history=history,
    )


def format_fit_report(result: FitResult, particle: Particle, n_points: int) -> str:
    lines = [
        "# recoil-spectroscopy cross-section fit",
        f"particle: {particle.name}",
        f"points: {n_points}",
        f"sigma_abs_m2: {result.sigma_abs!r}",
        f"sigma_abs_cm2: {result.sigma_abs * 1e4!r}",
        f"sigma_uncertainty_m2: {result.sigma_uncertainty!r}",
        f"sigma_uncertainty_cm2: {result.sigma_uncertainty * 1e4!r}",
        f"relative_uncertainty: {result.sigma_uncertainty / result.sigma_abs!r}",
        f"chi2: {result.chi2!r}",
        f"residual_norm: {result.residual_norm!r}",
    ]
    return "\n".join(lines) + "\n"
