"""JSON scenario schema (version 1).

Keys carry their unit as a suffix (``mass_amu``, ``period_nm``); parsing
converts everything to SI and builds the simulation objects. Unknown keys
are rejected.
"""
from __future__ import annotations

import json
import re
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import constants as const
from .core import BeamSource, Particle, VelocityDistribution
from .material import KickModel, NanoGrating, Screen
from .optical import OpticalGrating

SCHEMA_VERSION = 1

Pos = Annotated[float, Field(gt=0)]
NonNeg = Annotated[float, Field(ge=0)]


class ScenarioError(ValueError):
    """Malformed or invalid scenario document."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ParticleSpec(_Strict):
    name: str = "molecule"
    mass_amu: Pos
    alpha_static_A3: NonNeg = 0.0
    alpha_optical_A3: NonNeg = 0.0
    sigma_abs_m2: NonNeg = 0.0
    moment_of_inertia_kgm2: Optional[Pos] = None
    dipole_moment_debye: Optional[NonNeg] = None

    def build(self) -> Particle:
        return Particle(self.name, self.mass_amu, self.alpha_static_A3, self.alpha_optical_A3,
                        self.sigma_abs_m2, self.moment_of_inertia_kgm2, self.dipole_moment_debye)


class VelocitySpec(_Strict):
    kind: Literal["delta", "gaussian", "maxwell_boltzmann_beam"] = "delta"
    v_mean_m_s: Pos
    v_spread_m_s: NonNeg = 0.0

    @model_validator(mode="after")
    def _spread(self):
        if self.kind != "delta" and self.v_spread_m_s == 0:
            raise ValueError(f"{self.kind} velocity distribution needs v_spread_m_s > 0")
        return self

    def build(self) -> VelocityDistribution:
        return VelocityDistribution(self.kind, self.v_mean_m_s, self.v_spread_m_s)


class SourceSpec(_Strict):
    source_width_um: Pos
    distance_to_first_element_m: Pos
    velocity: VelocitySpec

    def build(self) -> BeamSource:
        return BeamSource(self.source_width_um * 1e-6, self.distance_to_first_element_m,
                          self.velocity.build())


class KickSpec(_Strict):
    kick_std_rad: NonNeg
    distribution: Literal["gaussian", "uniform"] = "gaussian"


class NanoGratingSpec(_Strict):
    period_nm: Pos
    slit_width_nm: Pos
    thickness_nm: Pos
    c3_meV_nm3: NonNeg = 0.0
    wall_cutoff_nm: Optional[Pos] = None
    charge_dephasing: Optional[KickSpec] = None

    @model_validator(mode="after")
    def _geometry(self):
        if self.slit_width_nm >= self.period_nm:
            raise ValueError("slit_width_nm must be smaller than period_nm")
        if self.wall_cutoff_nm is not None and self.wall_cutoff_nm >= 0.5 * self.slit_width_nm:
            raise ValueError("wall_cutoff_nm must be below half the slit width")
        return self

    def build(self) -> NanoGrating:
        kick = None
        if self.charge_dephasing is not None:
            kick = KickModel(self.charge_dephasing.kick_std_rad, self.charge_dephasing.distribution)
        cut = None if self.wall_cutoff_nm is None else self.wall_cutoff_nm * 1e-9
        return NanoGrating(self.period_nm * 1e-9, self.slit_width_nm * 1e-9, self.thickness_nm * 1e-9,
                           self.c3_meV_nm3 * const.meV_nm3, cut, kick)


class OpticalGratingSpec(_Strict):
    wavelength_nm: Pos
    power_W: NonNeg
    waist_y_um: Pos
    waist_z_um: Pos
    mode: Literal["phase_absorption", "depletion_only"] = "phase_absorption"

    def build(self) -> OpticalGrating:
        return OpticalGrating(self.wavelength_nm * 1e-9, self.power_W, self.waist_y_um * 1e-6,
                              self.waist_z_um * 1e-6, self.mode)


class _Base(_Strict):
    schema_version: Literal[1]
    seed: int = Field(default=0, ge=0, lt=2**64)
    particle: ParticleSpec
    source: SourceSpec


class CoherenceSpec(_Strict):
    delta_lambda_over_lambda: NonNeg = 0.0
    grating_period_nm: Optional[Pos] = None
    reference_wavelength_nm: Optional[Pos] = None
    n_orders: NonNeg = 1
    temperature_K: Optional[Pos] = None


class CoherenceScenario(_Base):
    kind: Literal["coherence"]
    coherence: CoherenceSpec = CoherenceSpec()


class ScreenSpec(_Strict):
    nx: Annotated[int, Field(gt=0)] = 512
    ny: Annotated[int, Field(gt=0)] = 256
    x_pitch_um: Pos = 20.0
    y_pitch_um: Pos = 5.0

    def build(self) -> Screen:
        return Screen(self.nx, self.ny, self.x_pitch_um * 1e-6, self.y_pitch_um * 1e-6)


class FarfieldSpec(_Strict):
    L2_m: Pos
    n_max: Annotated[int, Field(gt=0)] = 30
    samples_per_period: Annotated[int, Field(ge=64)] = 2**14
    n_velocities: Annotated[int, Field(gt=0)] = 64
    gravity_m_s2: NonNeg = const.g
    n_molecules: Annotated[int, Field(gt=0)] = 20000


class FarfieldScenario(_Base):
    kind: Literal["farfield"]
    grating: NanoGratingSpec
    farfield: FarfieldSpec
    screen: ScreenSpec = ScreenSpec()


class CurveSpec(_Strict):
    l_over_lt: Optional[list[Pos]] = None
    v_m_s: Optional[list[Pos]] = None
    l_over_lt_range: Optional[tuple[Pos, Pos, Annotated[int, Field(gt=0)]]] = None

    @model_validator(mode="after")
    def _one_axis(self):
        given = [x is not None for x in (self.l_over_lt, self.v_m_s, self.l_over_lt_range)]
        if sum(given) != 1:
            raise ValueError("give exactly one of l_over_lt, v_m_s, l_over_lt_range")
        return self


class KdtliSpec(_Strict):
    L_m: Pos = 0.105
    models: list[Literal["phase_only", "incoherent_absorption", "coherent_absorption"]] = [
        "phase_only", "incoherent_absorption", "coherent_absorption"]
    n_source_points: Annotated[int, Field(gt=0)] = 64
    n_source_slits: Annotated[int, Field(gt=0)] = 8
    velocity_quadrature: Annotated[int, Field(gt=0)] = 1
    phi0_rad: Optional[NonNeg] = None
    n0: Optional[NonNeg] = None
    n_periods: Annotated[int, Field(gt=0)] = 64
    samples_per_period: Annotated[int, Field(gt=0)] = 256
    n_offsets: Annotated[int, Field(ge=16)] = 64
    curve: CurveSpec


class KdtliScenario(_Base):
    kind: Literal["kdtli"]
    g1: NanoGratingSpec
    g2: OpticalGratingSpec
    g3: NanoGratingSpec
    kdtli: KdtliSpec


class SyntheticSpec(_Strict):
    D_min_m: Optional[Pos] = None
    D_max_m: Optional[Pos] = None
    power_min_W: Optional[NonNeg] = None
    power_max_W: Optional[Pos] = None
    n_points: Annotated[int, Field(ge=5)] = 20
    sigma_true_m2: Pos
    noise_std: NonNeg = 0.02

    @property
    def control_min(self) -> float:
        return self.D_min_m if self.D_min_m is not None else self.power_min_W

    @property
    def control_max(self) -> float:
        return self.D_max_m if self.D_max_m is not None else self.power_max_W


class RecoilSpec(_Strict):
    lambda_K_nm: Pos
    power_W: Pos
    waist_y_um: Pos
    period_nm: Pos
    L_m: Pos = 0.105
    scan_control: Literal["D", "power"] = "D"
    D_m: Optional[Pos] = None
    data_csv: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None

    @model_validator(mode="after")
    def _consistent(self):
        if (self.data_csv is None) == (self.synthetic is None):
            raise ValueError("give exactly one of data_csv or synthetic")
        if self.scan_control == "power" and self.D_m is None:
            raise ValueError("a power scan needs the laser position D_m")
        syn = self.synthetic
        if syn is not None:
            d_pair = (syn.D_min_m, syn.D_max_m)
            p_pair = (syn.power_min_W, syn.power_max_W)
            want, other = (d_pair, p_pair) if self.scan_control == "D" else (p_pair, d_pair)
            if None in want or any(x is not None for x in other):
                unit = "D_min_m/D_max_m" if self.scan_control == "D" else "power_min_W/power_max_W"
                raise ValueError(f"synthetic {self.scan_control} scan needs exactly {unit}")
            if not want[0] < want[1]:
                raise ValueError("synthetic scan range must be increasing")
        return self


class RecoilFitScenario(_Base):
    kind: Literal["recoil_fit"]
    recoil: RecoilSpec


Scenario = Annotated[
    Union[CoherenceScenario, FarfieldScenario, KdtliScenario, RecoilFitScenario],
    Field(discriminator="kind"),
]


class _Envelope(_Strict):
    scenario: Scenario


def _line_of(text: str, loc: tuple) -> Optional[int]:
    """Best-effort line number of the innermost key named in ``loc``."""
    keys = [k for k in loc if isinstance(k, str) and not k.endswith("Scenario")]
    for key in reversed(keys):
        match = re.search(r'"%s"\s*:' % re.escape(key), text)
        if match:
            return text.count("\n", 0, match.start()) + 1
    return None


def parse_scenario(text: str):
    """Validate a scenario document; raises :class:`ScenarioError` with field paths."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}, column {exc.colno}: invalid JSON ({exc.msg})") from None
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ScenarioError(
            f"schema_version: expected {SCHEMA_VERSION}, got {raw.get('schema_version')!r}")
    try:
        return _Envelope.model_validate({"scenario": raw}).scenario
    except ValidationError as exc:
        messages = []
        for err in exc.errors():
            loc = tuple(err["loc"][1:])
            if loc and loc[0] in ("coherence", "farfield", "kdtli", "recoil_fit") and len(loc) > 1:
                loc = loc[1:]
            path = ".".join(str(p) for p in loc) or "<root>"
            line = _line_of(text, loc)
            where = f"line {line}: " if line else ""
            messages.append(f"{where}{path}: {err['msg']}")
        raise ScenarioError("\n".join(messages)) from None
