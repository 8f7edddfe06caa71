"""Execute a parsed scenario: build the simulation objects, write artifacts, summarize."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .core import (
    coherence_lengths,
    de_broglie_wavelength,
    grating_momentum_equivalent,
    kinetic_energy,
    rotational_stats,
    talbot_scales,
)
from .errors import DomainError
from .kdtli import KdtliConfig, velocity_for_scaled_length, visibility_curve
from .material import detector_image, dephasing_sample, eikonal_transmission, far_field_orders
from .metrology import (
    RecoilScanConfig,
    ReductionMeasurement,
    fit_cross_section,
    format_fit_report,
    model_reduction,
    simulate_reduction_scan,
)
from .propagation import Grid
from .scenario import (
    CoherenceScenario,
    FarfieldScenario,
    KdtliScenario,
    RecoilFitScenario,
    ScenarioError,
)


@dataclass
class RunResult:
    summary: str
    artifacts: list[Path] = field(default_factory=list)


def _g(x) -> str:
    return format(float(x), ".6g")


def run_coherence(s: CoherenceScenario, out: Path, workers: Optional[int]) -> RunResult:
    particle = s.particle.build()
    source = s.source.build()
    v = source.velocity.mean()
    lam = de_broglie_wavelength(particle.mass, v)
    spec = s.coherence
    coh = coherence_lengths(source, lam, spec.delta_lambda_over_lambda * lam)
    rows = [
        ("mass_kg", particle.mass_kg, "kg"),
        ("velocity_m_s", v, "m/s"),
        ("source_width_m", source.source_width, "m"),
        ("distance_m", source.distance_to_first_element, "m"),
        ("lambda_dB_m", lam, "m"),
        ("kinetic_energy_eV", kinetic_energy(particle.mass, v), "eV"),
        ("L_c_m", coh["L_c"], "m"),
        ("X_c_m", coh["X_c"], "m"),
    ]
    summary = f"coherence: lambda_dB={_g(lam)} m X_c={_g(coh['X_c'])} m L_c={_g(coh['L_c'])} m"
    if spec.grating_period_nm is not None:
        d = spec.grating_period_nm * 1e-9
        tal = talbot_scales(d, lam, particle.mass)
        rows += [("L_T_m", tal["L_T"], "m"), ("T_T_s", tal["T_T"], "s")]
        summary += f" L_T={_g(tal['L_T'])} m"
        if spec.reference_wavelength_nm is not None:
            ratio = grating_momentum_equivalent(d, spec.n_orders, spec.reference_wavelength_nm * 1e-9)
            rows.append(("momentum_in_reference_photons", ratio, "1"))
    if particle.moment_of_inertia is not None:
        T = spec.temperature_K
        rot = rotational_stats(particle.moment_of_inertia, T if T is not None else 1.0)
        rows.append(("B_temp_K", rot["B_temp"], "K"))
        if T is not None:
            rows.append(("J_mean", rot["J_mean"], "1"))
    path = io.write_csv(out / "coherence.csv", ["quantity", "value", "unit"], rows)
    return RunResult(summary, [path])


def run_farfield(s: FarfieldScenario, out: Path, workers: Optional[int]) -> RunResult:
    particle = s.particle.build()
    source = s.source.build()
    grating = s.grating.build()
    ff = s.farfield
    v = source.velocity.mean()
    lam = de_broglie_wavelength(particle.mass, v)
    t = eikonal_transmission(grating, v, Grid(ff.samples_per_period, grating.period))
    pattern = far_field_orders(t, grating.period, lam, ff.n_max)
    image = detector_image(grating, particle.mass, source, ff.L2_m, s.screen.build(),
                           n_velocities=ff.n_velocities, n_samples=ff.samples_per_period,
                           gravity=ff.gravity_m_s2, workers=workers)
    if grating.charge_dephasing is not None:
        rows = []
        for k, row in enumerate(image.grid):
            vr = image.row_velocity[k]
            if not np.isfinite(vr) or not row.any():
                rows.append(row)
                continue
            fringe = de_broglie_wavelength(particle.mass, vr) * ff.L2_m / grating.period
            rows.append(dephasing_sample(row, image.x_pitch, fringe, grating.charge_dephasing,
                                         ff.n_molecules, seed=(s.seed + k) % 2**64))
        image.grid = np.clip(np.array(rows), 0.0, None)
    orders = io.write_orders(out / "orders.csv", pattern)
    pgm = io.write_pgm(out / "detector.pgm", image)
    summary = (f"farfield: lambda_dB={_g(lam)} m transmitted={_g(pattern.transmitted)} "
               f"I0={_g(pattern.intensity[pattern.n == 0][0])} clipped={_g(image.clipped_mass)}")
    return RunResult(summary, [orders, pgm])


def run_kdtli(s: KdtliScenario, out: Path, workers: Optional[int]) -> RunResult:
    particle = s.particle.build()
    k = s.kdtli
    base = KdtliConfig(
        g1=s.g1.build(), g2=s.g2.build(), g3=s.g3.build(), particle=particle, source=s.source.build(),
        L=k.L_m, n_source_points=k.n_source_points, n_source_slits=k.n_source_slits,
        velocity_quadrature=k.velocity_quadrature, phi0=k.phi0_rad, n0=k.n0, n_periods=k.n_periods,
        samples_per_period=k.samples_per_period, n_offsets=k.n_offsets,
    )
    curve = k.curve
    requested = None
    if curve.v_m_s is not None:
        v_grid = np.sort(np.array(curve.v_m_s, dtype=float))
    else:
        if curve.l_over_lt is not None:
            requested = np.sort(np.array(curve.l_over_lt, dtype=float))[::-1]
        else:
            lo, hi, n = curve.l_over_lt_range
            requested = np.linspace(lo, hi, n)[::-1]
        v_grid = velocity_for_scaled_length(base.L, base.period, particle.mass, requested)
    curves = []
    for model in k.models:
        c = visibility_curve(replace(base, model=model), v_grid, workers=workers)
        if requested is not None:
            c.x_axis = requested.copy()
        # rows in ascending L / L_T
        curves.append(replace(c, x_axis=c.x_axis[::-1], visibility=c.visibility[::-1],
                              velocities=c.velocities[::-1], phase=c.phase[::-1]))
    path = io.write_visibility_curves(out / "visibility_curve.csv", curves)
    peaks = " ".join(f"{c.model}:Vmax={_g(c.visibility.max())}" for c in curves)
    return RunResult(f"kdtli: {len(v_grid)} points {peaks}", [path])


def run_recoil_fit(s: RecoilFitScenario, out: Path, workers: Optional[int],
                   base_dir: Optional[Path] = None) -> RunResult:
    particle = s.particle.build()
    r = s.recoil
    config = RecoilScanConfig(D=r.D_m or 0.0, lambda_K=r.lambda_K_nm * 1e-9, power=r.power_W,
                              w_y=r.waist_y_um * 1e-6, d=r.period_nm * 1e-9,
                              velocity=s.source.velocity.build(), L=r.L_m)
    if r.data_csv is not None:
        path = Path(r.data_csv)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            data = ReductionMeasurement.from_csv(path)
        except DomainError as exc:
            raise ScenarioError(str(exc)) from None
        if data.kind != r.scan_control:
            raise ScenarioError(f"{path}: data scan '{data.kind}' does not match scan_control '{r.scan_control}'")
    else:
        syn = r.synthetic
        truth = replace(particle, sigma_abs=syn.sigma_true_m2)
        values = np.linspace(syn.control_min, syn.control_max, syn.n_points)
        data = simulate_reduction_scan(config, values, truth, syn.noise_std, s.seed, r.scan_control)
    result = fit_cross_section(data, config, particle)
    report = format_fit_report(result, particle, data.R.size)
    scan_path = out / "reduction_scan.csv"
    data.to_csv(scan_path)
    model = model_reduction(data, config, particle, result.sigma_abs)
    fit_path = io.write_csv(out / "reduction_fit.csv", [f"control_{'m' if data.kind == 'D' else 'W'}", "R_model"],
                            zip(data.control, model))
    report_path = out / "fit_report.txt"
    report_path.write_text(report)
    summary = (f"recoil_fit: sigma_abs={_g(result.sigma_abs)} m^2 "
               f"+- {_g(result.sigma_uncertainty)} m^2 chi2={_g(result.chi2)} points={data.R.size}")
    return RunResult(summary, [scan_path, fit_path, report_path])


RUNNERS = {
    "coherence": run_coherence,
    "farfield": run_farfield,
    "kdtli": run_kdtli,
    "recoil_fit": run_recoil_fit,
}


def run_scenario(s, out, workers: Optional[int] = None, base_dir: Optional[Path] = None) -> RunResult:
    """Run a validated scenario, writing its artifacts into ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if s.kind == "recoil_fit":
        return run_recoil_fit(s, out, workers, base_dir)
    return RUNNERS[s.kind](s, out, workers)
