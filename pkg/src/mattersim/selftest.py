"""Field check of an installed build.

Runs a set of fast invariants for every module, prints one PASS/FAIL line per
check, then runs the bundled scenarios (the interferometer curve at reduced
resolution) and writes their artifacts plus ``selftest_report.txt`` into the
output directory. Every artifact depends only on the scenarios and seeds, so
repeated runs with any thread count produce identical bytes.
"""
from __future__ import annotations

import math
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.special import jv

from .core import (
    BeamSource,
    Particle,
    VelocityDistribution,
    coherence_lengths,
    grating_momentum_equivalent,
    kinetic_energy,
    recoil_coherence_bound,
    rotational_stats,
)
from .errors import MatterSimError
from .kdtli import KdtliConfig, fringe_scan, sinusoidal_visibility, velocity_for_scaled_length
from .material import NanoGrating, Screen, detector_image, eikonal_transmission, far_field_orders
from .metrology import (
    RecoilScanConfig,
    ReductionMeasurement,
    averaged_reduction,
    fit_cross_section,
    reduction_single_velocity,
)
from .optical import GratingInteraction, OpticalGrating, analytic_orders, photon_class_transmission
from .propagation import Grid, TransverseField, fresnel_propagate
from .runner import run_scenario
from .scenario import ScenarioError, parse_scenario

BUNDLED = ("coherence_c70", "farfield_pch2", "kdtli_c70", "recoil_fit_pch2")
RECOIL_SIGMA_TRUE = 1e-21  # cross section used to generate recoil_synthetic.csv


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("mattersim") / "data" / name))


def _check(cond: bool, detail: str) -> tuple[bool, str]:
    return bool(cond), detail


# core_physics

def _momentum():
    r = grating_momentum_equivalent(100e-9, 18, 780e-9)
    return _check(abs(r - 140.4) < 0.1, f"18 orders of 100 nm = {r:.4f} photons at 780 nm")


def _coherence():
    src = BeamSource(1e-6, 1.55, VelocityDistribution.delta(100.0))
    x1 = coherence_lengths(src, 3e-12, 0.0)["X_c"]
    x2 = coherence_lengths(BeamSource(2e-6, 1.55, src.velocity), 3e-12, 0.0)["X_c"]
    return _check(abs(x1 - 9.3e-6) < 0.01e-6 and abs(x2 - 4.65e-6) < 0.01e-6,
                  f"X_c = {x1 * 1e6:.3f}, {x2 * 1e6:.3f} um")


def _scales():
    b = rotational_stats(9e-42, 0.38)
    e1 = kinetic_energy(1e4, 20.0)
    e2 = kinetic_energy(1e10, 10.0)
    bound = recoil_coherence_bound(0.5e-9)
    ok = (abs(b["B_temp"] / 40e-6 - 1) < 0.15 and 80 <= b["J_mean"] <= 110
          and abs(e1 - 20.7e-3) < 0.3e-3 and abs(e2 - 5.18e3) < 50 and abs(bound - 2.80e-9) < 0.01e-9)
    return _check(ok, f"B_temp={b['B_temp'] * 1e6:.2f} uK J={b['J_mean']:.1f} E={e1 * 1e3:.2f} meV")


def _velocity_average():
    dist = VelocityDistribution("gaussian", 200.0, 20.0)
    mean = dist.integrate(lambda v: v)
    norm = dist.integrate(lambda v: np.ones_like(v))
    return _check(abs(norm - 1) < 1e-10 and abs(mean - dist.mean()) < 1e-8 * dist.mean(),
                  f"normalisation error {abs(norm - 1):.1e}")


# material_grating

def _binary_orders():
    grid = Grid(4096, 100e-9)
    g = NanoGrating(100e-9, 50e-9, 45e-9)
    t = eikonal_transmission(g, 258.0, grid)
    pat = far_field_orders(t, g.period, 3e-12, 10)
    expect = (0.5 * np.sinc(0.5 * pat.n)) ** 2
    err = float(np.max(np.abs(pat.intensity - expect)))
    return _check(err < 1e-12, f"top-hat orders max error {err:.1e}")


def _detector_mass():
    g = NanoGrating(100e-9, 50e-9, 45e-9, c3=2.7e-48)
    src = BeamSource(5e-6, 1.0, VelocityDistribution("gaussian", 258.0, 20.0))
    img = detector_image(g, 514.0, src, 0.56, Screen(4096, 256, 4e-6, 2e-6), n_velocities=16,
                         n_samples=4096, workers=1)
    err = abs(img.total + img.clipped_mass - img.transmitted)
    return _check(err < 1e-12 and img.transmitted <= g.open_fraction + 1e-12,
                  f"deposited + clipped - transmitted = {err:.1e}")


# optical_grating

def _jacobi_anger():
    worst = 0.0
    for phi0 in (0.5, 2.0, 5.0):
        n, p = analytic_orders(phi0, 10)
        worst = max(worst, float(np.max(np.abs(np.sqrt(p) - np.abs(jv(n, phi0 / 2))))))
    return _check(worst < 1e-10, f"|c_n| - |J_n(phi0/2)| <= {worst:.1e}")


def _photon_classes():
    x = np.linspace(0, 532e-9, 257)
    k_L = 2 * math.pi / 532e-9
    worst = 0.0
    for n0 in (0.05, 0.3, 1.0):
        inter = GratingInteraction(2.0, n0)
        total = sum(np.abs(photon_class_transmission(inter, j, x, k_L)) ** 2 for j in inter.classes)
        worst = max(worst, float(np.max(np.abs(total - 1))))
    return _check(worst < 1e-9, f"class probability deficit {worst:.1e}")


# propagation

def _talbot_revival():
    lam, d = 5e-12, 100e-9
    grid = Grid(256, d, n_periods=4)
    frac = (grid.x % d) / d
    field = TransverseField((np.abs(frac - 0.5) < 0.25).astype(complex), grid, lam)
    L_T = d * d / lam
    i0 = field.intensity()
    full = fresnel_propagate(field, 2 * L_T).intensity()
    half = fresnel_propagate(field, L_T).intensity()
    shifted = np.roll(i0, grid.samples_per_period // 2)
    e1, e2 = np.max(np.abs(full - i0)), np.max(np.abs(half - shifted))
    return _check(max(e1, e2) < 1e-8, f"revival errors {e1:.1e}, {e2:.1e}")


def _unitarity():
    grid = Grid(1024, 1e-6)
    rng = np.random.default_rng(1)
    field = TransverseField(rng.standard_normal(1024) + 1j * rng.standard_normal(1024), grid, 3e-12)
    out = fresnel_propagate(field, 0.37)
    err = abs(out.norm() / field.norm() - 1)
    return _check(err < 1e-12, f"norm change {err:.1e}")


# kdtli

def _kdtli_config(model, phi0, n0, coarse=True):
    g = NanoGrating(266e-9, 110e-9, 190e-9)
    res = dict(n_periods=16, samples_per_period=128, n_offsets=32, n_source_points=16, n_source_slits=4)
    return KdtliConfig(
        g1=g, g3=g, g2=OpticalGrating(532e-9, 1.0, 900e-6, 20e-6),
        particle=Particle("C70", 840.0), source=BeamSource(1e-3, 1.0, VelocityDistribution.delta(150.0)),
        model=model, phi0=phi0, n0=n0, **(res if coarse else {}),
    )


def _kdtli_null():
    cfg = _kdtli_config("coherent_absorption", 0.0, 0.0)
    v = float(velocity_for_scaled_length(cfg.L, cfg.period, 840.0, 1.0))
    vis = sinusoidal_visibility(fringe_scan(cfg, v, workers=1))
    return _check(vis < 1e-3, f"V = {vis:.1e} with the light grating off")


def _kdtli_phase_law():
    # plane-wave Talbot-Lau result for a pure phase grating
    cfg = _kdtli_config("phase_only", 2.0, 0.0, coarse=False)
    xi = 1.3
    v = float(velocity_for_scaled_length(cfg.L, cfg.period, 840.0, xi))
    vis = sinusoidal_visibility(fringe_scan(cfg, v, workers=1))
    # open fraction as resolved by the sampling grid
    mask = eikonal_transmission(cfg.g1, v, Grid(cfg.samples_per_period, cfg.period))
    f = np.count_nonzero(mask) / mask.size
    expect = 2 * np.sinc(f) ** 2 * abs(jv(2, 2.0 * math.sin(math.pi * xi)))
    return _check(abs(vis - expect) < 1e-3 * expect, f"V = {vis:.5f}, closed form {expect:.5f}")


# metrology

def _reduction_limits():
    n0, d = 0.25, 266e-9
    r0 = float(reduction_single_velocity(n0, 0.0, d))
    rh = float(reduction_single_velocity(n0, d / 2, d))
    cfg = RecoilScanConfig(0.015, 532e-9, 7.0, 1e-3, d, VelocityDistribution.delta(200.0))
    p = Particle("PcH2", 514.0, sigma_abs=1e-21)
    ra = averaged_reduction(cfg, p)
    rs = float(reduction_single_velocity(cfg.mean_photons(p, 200.0), cfg.displacement(p, 200.0), d))
    ok = abs(r0 - 1) < 1e-12 and abs(rh - math.exp(-2 * n0)) < 1e-12 and abs(ra - rs) < 1e-12
    return _check(ok, f"R(0)={r0:.12f} R(d/2)={rh:.12f}")


def _bundled_fit():
    cfg = RecoilScanConfig(0.0, 532e-9, 5.5, 1e-3, 266e-9, VelocityDistribution("gaussian", 200.0, 20.0))
    data = ReductionMeasurement.from_csv(bundled_path("recoil_synthetic.csv"))
    fit = fit_cross_section(data, cfg, Particle("PcH2", 514.0))
    rel = fit.sigma_abs / RECOIL_SIGMA_TRUE - 1
    return _check(abs(rel) < 0.02, f"sigma recovered to {rel * 100:+.2f} %")


# cli_io

def _schema():
    text = bundled_path("coherence_c70.json").read_text()
    same = parse_scenario(text) == parse_scenario(text)
    try:
        parse_scenario(text.replace('"mass_amu": 840.0', '"mass_amu": -840.0'))
        rejected = False
    except ScenarioError as exc:
        rejected = "particle.mass_amu" in str(exc)
    try:
        parse_scenario(text.replace('"seed": 0', '"seed": 0, "colour": 1'))
        unknown = False
    except ScenarioError:
        unknown = True
    return _check(same and rejected and unknown, "purity, field paths, unknown keys")


CHECKS: list[tuple[str, str, Callable[[], tuple[bool, str]]]] = [
    ("core_physics", "momentum equivalent", _momentum),
    ("core_physics", "coherence lengths", _coherence),
    ("core_physics", "rotational and kinetic scales", _scales),
    ("core_physics", "velocity quadrature", _velocity_average),
    ("material_grating", "binary grating orders", _binary_orders),
    ("material_grating", "detector probability balance", _detector_mass),
    ("optical_grating", "Bessel orders", _jacobi_anger),
    ("optical_grating", "photon class completeness", _photon_classes),
    ("propagation", "Talbot revival", _talbot_revival),
    ("propagation", "unitarity", _unitarity),
    ("kdtli", "null visibility", _kdtli_null),
    ("kdtli", "phase grating law", _kdtli_phase_law),
    ("metrology", "reduction limits", _reduction_limits),
    ("metrology", "bundled cross-section fit", _bundled_fit),
    ("cli_io", "scenario schema", _schema),
]


def _reduced(scenario):
    """Bundled interferometer scenario at selftest resolution."""
    k = scenario.kdtli.model_copy(update={
        "n_periods": 16, "samples_per_period": 128, "n_offsets": 32, "n_source_points": 16,
        "n_source_slits": 4, "curve": scenario.kdtli.curve.model_copy(update={"l_over_lt_range": (0.5, 2.5, 6)}),
    })
    return scenario.model_copy(update={"kdtli": k})


def run_selftest(out, workers: Optional[int] = None, echo: Callable[[str], None] = print) -> bool:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    ok_all = True
    for module, name, check in CHECKS:
        try:
            ok, detail = check()
        except (MatterSimError, ArithmeticError, ValueError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= ok
        lines.append(f"{'PASS' if ok else 'FAIL'} {module}: {name} ({detail})")
        echo(lines[-1])
    for stem in BUNDLED:
        path = bundled_path(stem + ".json")
        scenario = parse_scenario(path.read_text())
        if scenario.kind == "kdtli":
            scenario = _reduced(scenario)
        try:
            result = run_scenario(scenario, out / stem, workers=workers, base_dir=path.parent)
            line = f"PASS cli_io: scenario {stem} ({result.summary})"
        except (MatterSimError, ArithmeticError, ValueError) as exc:
            ok_all = False
            line = f"FAIL cli_io: scenario {stem} ({type(exc).__name__}: {exc})"
        lines.append(line)
        echo(line)
    lines.append(f"{'PASS' if ok_all else 'FAIL'} selftest")
    echo(lines[-1])
    (out / "selftest_report.txt").write_text("\n".join(lines) + "\n")
    return ok_all
