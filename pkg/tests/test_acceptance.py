"""Acceptance checks, one per criterion, each printing a single PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines.
"""
import filecmp
import math
import os
import subprocess
import sys
import time
import timeit
from dataclasses import replace

import numpy as np
from scipy.special import jv

from mattersim.core import (
    BeamSource,
    Particle,
    VelocityDistribution,
    coherence_lengths,
    de_broglie_wavelength,
    grating_momentum_equivalent,
    kinetic_energy,
    recoil_coherence_bound,
    rotational_stats,
)
from mattersim.kdtli import KdtliConfig, velocity_for_scaled_length, visibility_curve
from mattersim.material import (
    NanoGrating,
    calibrate_c3,
    effective_slit_width,
    eikonal_transmission,
    far_field_orders,
)
from mattersim.metrology import (
    RecoilScanConfig,
    averaged_reduction,
    fit_cross_section,
    reduction_single_velocity,
    simulate_reduction_scan,
)
from mattersim.optical import GratingInteraction, OpticalGrating, analytic_orders, photon_class_transmission
from mattersim.propagation import Grid, TransverseField, fresnel_propagate

from oracles import talbot_lau_visibility


def report(number, ok, detail, elapsed, budget):
    within = elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    print(f"\n{status} criterion {number}: {detail} [{elapsed * 1e3:.3g} ms, budget {budget * 1e3:.3g} ms]")
    assert ok, detail
    assert within, f"runtime {elapsed:.3g} s exceeds {budget:.3g} s"


def best_time(func, repeat=50):
    return min(timeit.repeat(func, number=1, repeat=repeat))


def test_criterion_01_momentum_equivalent():
    value = grating_momentum_equivalent(100e-9, 18, 780e-9)
    elapsed = best_time(lambda: grating_momentum_equivalent(100e-9, 18, 780e-9))
    report(1, abs(value - 140.4) <= 0.1, f"18 orders of 100 nm = {value:.4f} hbar k at 780 nm", elapsed, 1e-3)


def test_criterion_02_transverse_coherence():
    velocity = VelocityDistribution.delta(100.0)

    def run():
        return [coherence_lengths(BeamSource(w, 1.55, velocity), 3e-12, 0.0)["X_c"] for w in (1e-6, 2e-6)]

    x1, x2 = run()
    ok = abs(x1 - 9.3e-6) <= 0.005e-6 and abs(x2 - 4.65e-6) <= 0.005e-6
    report(2, ok, f"X_c = {x1 * 1e6:.3f} um, {x2 * 1e6:.3f} um", best_time(run), 1e-3)


def test_criterion_03_recoil_bound():
    value = recoil_coherence_bound(0.5e-9)
    report(3, abs(value - 2.80e-9) <= 0.01e-9, f"bound = {value * 1e9:.4f} nm",
           best_time(lambda: recoil_coherence_bound(0.5e-9)), 1e-3)


def test_criterion_04_bessel_orders():
    def run():
        worst, norm_err = 0.0, 0.0
        for phi0 in (0.5, 2.0, 5.0):
            n, p = analytic_orders(phi0, 10)
            worst = max(worst, float(np.max(np.abs(np.sqrt(p) - np.abs(jv(n, phi0 / 2))))))
            _, full = analytic_orders(phi0, 127)
            norm_err = max(norm_err, abs(full.sum() - 1))
        return worst, norm_err

    t0 = time.perf_counter()
    worst, norm_err = run()
    elapsed = time.perf_counter() - t0
    report(4, worst <= 1e-10 and norm_err <= 1e-12,
           f"max | |c_n| - |J_n(phi0/2)| | = {worst:.2e}, |sum - 1| = {norm_err:.2e}", elapsed, 1.0)


def test_criterion_05_photon_class_completeness():
    x = np.linspace(0.0, 532e-9, 1001)
    k_L = 2 * math.pi / 532e-9
    t0 = time.perf_counter()
    worst = 0.0
    for n0 in (0.05, 0.3, 1.0):
        inter = GratingInteraction(2.0, n0)
        total = sum(np.abs(photon_class_transmission(inter, j, x, k_L)) ** 2 for j in inter.classes)
        worst = max(worst, float(np.max(np.abs(total - 1))))
    elapsed = time.perf_counter() - t0
    report(5, worst <= 1e-9, f"max |sum_j |t_j|^2 - 1| = {worst:.2e}", elapsed, 1.0)


def test_criterion_06_talbot_revival():
    t0 = time.perf_counter()
    d, lam = 100e-9, 5e-12
    grid = Grid(8 * 512, d, 8)
    u = (grid.x % d) / d
    field = TransverseField((np.abs(u - 0.5) < 0.25).astype(complex), grid, lam)
    L_T = d * d / lam
    i0 = field.intensity()
    e_full = float(np.max(np.abs(fresnel_propagate(field, 2 * L_T).intensity() - i0)))
    shifted = np.roll(i0, grid.samples_per_period // 2)
    e_half = float(np.max(np.abs(fresnel_propagate(field, L_T).intensity() - shifted)))
    elapsed = time.perf_counter() - t0
    report(6, max(e_full, e_half) <= 1e-8,
           f"|I(2L_T) - I(0)| = {e_full:.1e}, |I(L_T) - I(0, shifted d/2)| = {e_half:.1e}", elapsed, 5.0)


def test_criterion_07_kdtli_null_and_model_separation():
    d = 266e-9
    g = NanoGrating(d, 110e-9, 190e-9)
    c70 = Particle("C70", 840.0)
    base = KdtliConfig(g1=g, g3=g, g2=OpticalGrating(532e-9, 1.0, 900e-6, 20e-6), particle=c70,
                       source=BeamSource(1e-3, 1.0, VelocityDistribution.delta(150.0)), phi0=2.0, n0=0.2)
    xi = np.linspace(0.5, 2.5, 20)
    v = np.sort(velocity_for_scaled_length(base.L, d, c70.mass, xi))
    xi_sorted = velocity_for_scaled_length(base.L, d, c70.mass, v)

    t0 = time.perf_counter()
    null = visibility_curve(replace(base, phi0=0.0, n0=0.0), v[[0, 9, 19]])
    curves = {m: visibility_curve(replace(base, model=m), v)
              for m in ("phase_only", "incoherent_absorption", "coherent_absorption")}
    elapsed = time.perf_counter() - t0

    # numerical error per point: distance to the independent plane-wave oracle
    mask = eikonal_transmission(g, 150.0, Grid(base.samples_per_period, d))
    f = np.count_nonzero(mask) / mask.size
    err = {m: np.array([abs(c.visibility[i] - talbot_lau_visibility(2.0, 0.0 if m == "phase_only" else 0.2,
                                                                      x, f, f, m))
                        for i, x in enumerate(xi_sorted)]) for m, c in curves.items()}
    pairs = [("phase_only", "incoherent_absorption"), ("phase_only", "coherent_absorption"),
             ("incoherent_absorption", "coherent_absorption")]
    margins = {}
    for a, b in pairs:
        gap = np.abs(curves[a].visibility - curves[b].visibility)
        margins[(a, b)] = float(np.max(gap - (err[a] + err[b])))
    ok = null.visibility.max() < 1e-3 and all(m > 0 for m in margins.values())
    detail = (f"null V <= {null.visibility.max():.1e}; max separation minus error: "
              + ", ".join(f"{a[:4]}/{b[:4]} {m:.3f}" for (a, b), m in margins.items())
              + f"; max oracle error {max(e.max() for e in err.values()):.1e}")
    report(7, ok, detail, elapsed, 300.0)


def test_criterion_08_effective_width_round_trip():
    t0 = time.perf_counter()
    mass, v = 514.0, 258.0
    grating = NanoGrating(100e-9, 50e-9, 45e-9)
    c3 = calibrate_c3(grating, mass, v, 15e-9)
    calibrated = NanoGrating(100e-9, 50e-9, 45e-9, c3)
    lam = de_broglie_wavelength(mass, v)
    pattern = far_field_orders(eikonal_transmission(calibrated, v, Grid(2**14, 100e-9)), 100e-9, lam, 30)
    w = effective_slit_width(pattern, 100e-9)
    elapsed = time.perf_counter() - t0
    report(8, abs(w - 15e-9) <= 1e-9,
           f"C3 = {c3:.4e} J m^3 ({c3 / 1.602176634e-49:.2f} meV nm^3), refit w_eff = {w * 1e9:.4f} nm",
           elapsed, 30.0)


def test_criterion_09_reduction_limits():
    d, n0 = 266e-9, 0.3
    cfg = RecoilScanConfig(0.015, 532e-9, 7.0, 1e-3, d, VelocityDistribution.delta(200.0))
    p = Particle("PcH2", 514.0, sigma_abs=1e-21)

    def run():
        r0 = float(reduction_single_velocity(n0, 0.0, d))
        rh = float(reduction_single_velocity(n0, d / 2, d))
        ra = averaged_reduction(cfg, p)
        rs = float(reduction_single_velocity(cfg.mean_photons(p, 200.0), cfg.displacement(p, 200.0), d))
        return r0, rh, ra, rs

    r0, rh, ra, rs = run()
    ok = abs(r0 - 1) <= 1e-12 and abs(rh - math.exp(-2 * n0)) <= 1e-12 and abs(ra - rs) <= 1e-12
    report(9, ok, f"R(0) - 1 = {r0 - 1:.1e}, R(d/2) - exp(-2n0) = {rh - math.exp(-2 * n0):.1e}, "
                  f"delta average - single = {ra - rs:.1e}", best_time(run), 1e-3)


def test_criterion_10_cross_section_round_trip():
    truth = Particle("PcH2", 514.0, sigma_abs=1e-21)
    blank = replace(truth, sigma_abs=0.0)
    cfg = RecoilScanConfig(0.0, 532e-9, 5.5, 1e-3, 266e-9, VelocityDistribution("gaussian", 200.0, 20.0))
    n0_range = (cfg.mean_photons(truth, 240.0), cfg.mean_photons(truth, 160.0))
    D = np.linspace(0.011, 0.018, 20)
    t0 = time.perf_counter()
    errors = []
    for seed in range(200):
        data = simulate_reduction_scan(cfg, D, truth, noise_std=0.02, seed=seed)
        errors.append(fit_cross_section(data, cfg, blank).sigma_abs / 1e-21 - 1)
    elapsed = time.perf_counter() - t0
    errors = np.abs(errors)
    frac = float(np.mean(errors <= 0.02))
    report(10, frac >= 0.9 and 0.1 <= n0_range[0] and n0_range[1] <= 0.3,
           f"{frac * 100:.1f}% of 200 fits within 2% (median error {np.median(errors) * 100:.2f}%, "
           f"n0 over +-2 sigma of v: {n0_range[0]:.3f}-{n0_range[1]:.3f})", elapsed, 60.0)


def test_criterion_11_rotational_and_kinetic_scales():
    def run():
        b = rotational_stats(9e-42, 1.0)["B_temp"]
        j = rotational_stats(9e-42, 0.38)["J_mean"]
        return b, j, kinetic_energy(1e4, 20.0), kinetic_energy(1e10, 10.0)

    b, j, e1, e2 = run()
    ok = (abs(b / 40e-6 - 1) <= 0.15 and 80 <= j <= 110 and abs(e1 - 20.7e-3) <= 0.3e-3
          and abs(e2 - 5.18e3) <= 50)
    report(11, ok, f"B_temp = {b * 1e6:.2f} uK, J_mean = {j:.1f}, E = {e1 * 1e3:.2f} meV, {e2 / 1e3:.3f} keV",
           best_time(run), 1e-3)


def test_criterion_12_selftest_deterministic(tmp_path):
    env = {k: v for k, v in os.environ.items() if k != "MATTERSIM_THREADS"}
    t0 = time.perf_counter()
    runs = {}
    for label, threads in (("a1", 1), ("a8", 8), ("b1", 1), ("b8", 8)):
        out = tmp_path / label
        proc = subprocess.run([sys.executable, "-m", "mattersim.cli", "selftest", "--out", str(out),
                               "--threads", str(threads)], capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        runs[label] = out
    elapsed = time.perf_counter() - t0

    def tree(root):
        return sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())

    files = tree(runs["a1"])
    same = all(tree(r) == files for r in runs.values())
    for label in ("a8", "b1", "b8"):
        match, mismatch, errors = filecmp.cmpfiles(runs["a1"], runs[label], [str(f) for f in files], shallow=False)
        same &= not mismatch and not errors
    report(12, same, f"{len(files)} artifacts byte-identical over 2 runs x threads {{1, 8}}", elapsed, 600.0)
