import math
from dataclasses import replace

import numpy as np
import pytest

from mattersim.core import BeamSource, Particle, VelocityDistribution
from mattersim.errors import DomainError, ResolutionError
from mattersim.kdtli import (
    FringeScan,
    KdtliConfig,
    fringe_phase,
    fringe_scan,
    scaled_length,
    sinusoidal_visibility,
    velocity_for_scaled_length,
    visibility_curve,
)
from mattersim.material import NanoGrating, eikonal_transmission
from mattersim.optical import OpticalGrating
from mattersim.propagation import Grid

from oracles import talbot_lau_visibility

D = 266e-9
G = NanoGrating(D, 110e-9, 190e-9)
C70 = Particle("C70", 840.0, alpha_optical=118.0, sigma_abs=2.7e-21)
COARSE = dict(n_periods=16, samples_per_period=128, n_offsets=32, n_source_points=16, n_source_slits=4)


def config(model="coherent_absorption", phi0=2.0, n0=0.2, coarse=False, **kw):
    res = COARSE if coarse else {}
    return KdtliConfig(g1=G, g3=G, g2=OpticalGrating(532e-9, 1.0, 900e-6, 20e-6), particle=C70,
                       source=BeamSource(1e-3, 1.0, VelocityDistribution.delta(150.0)),
                       model=model, phi0=phi0, n0=n0, **{**res, **kw})


def velocity(cfg, xi):
    return float(velocity_for_scaled_length(cfg.L, cfg.period, C70.mass, xi))


def sampled_open_fraction(cfg):
    mask = eikonal_transmission(cfg.g1, 100.0, Grid(cfg.samples_per_period, cfg.period))
    return np.count_nonzero(mask) / mask.size


def wrap(a):
    return (a + math.pi) % (2 * math.pi) - math.pi


def test_scaled_length_round_trip():
    v = velocity_for_scaled_length(0.105, D, 840.0, 1.7)
    assert scaled_length(0.105, D, 840.0, v) == pytest.approx(1.7, rel=1e-14)


@pytest.mark.parametrize("model,xi", [
    ("phase_only", 0.7),
    ("phase_only", 1.3),
    ("coherent_absorption", 0.6),
    ("coherent_absorption", 1.55),
    ("incoherent_absorption", 0.9),
    ("incoherent_absorption", 1.8),
])
def test_visibility_matches_analytic_talbot_lau(model, xi):
    cfg = config(model)
    vis = sinusoidal_visibility(fringe_scan(cfg, velocity(cfg, xi), workers=1))
    f = sampled_open_fraction(cfg)
    n0 = 0.0 if model == "phase_only" else 0.2
    expect = talbot_lau_visibility(2.0, n0, xi, f, f, model)
    assert vis == pytest.approx(expect, rel=2e-3, abs=2e-4)


def test_null_without_light_grating():
    cfg = config(phi0=0.0, n0=0.0)
    for xi in (0.5, 1.0, 2.0):
        assert sinusoidal_visibility(fringe_scan(cfg, velocity(cfg, xi), workers=1)) < 1e-3


def test_g2_translation_moves_fringes_by_twice_its_phase():
    cfg = config("phase_only", coarse=True)
    v = velocity(cfg, 1.3)
    p0 = fringe_phase(fringe_scan(cfg, v, workers=1))
    for frac in (0.05, 0.1, 0.2):
        p = fringe_phase(fringe_scan(replace(cfg, g2_offset=frac * D), v, workers=1))
        assert wrap(p - p0 + 4 * math.pi * frac) == pytest.approx(0.0, abs=1e-4)


def test_g2_translation_keeps_visibility_within_source_quadrature():
    # exact only for point emitters; finite coherent top-hats leave a small residue
    for model in ("phase_only", "coherent_absorption"):
        cfg = config(model, coarse=True)
        v = velocity(cfg, 1.3)
        v0 = sinusoidal_visibility(fringe_scan(cfg, v, workers=1))
        for frac in (0.125, 0.3):
            moved = sinusoidal_visibility(fringe_scan(replace(cfg, g2_offset=frac * D), v, workers=1))
            assert moved == pytest.approx(v0, abs=5e-5)


def test_common_translation_leaves_fringes_unchanged():
    cfg = config("coherent_absorption", coarse=True)
    v = velocity(cfg, 1.3)
    pitch = D / cfg.samples_per_period
    a = fringe_scan(cfg, v, workers=1)
    b = fringe_scan(replace(cfg, global_offset=13 * pitch), v, workers=1)
    assert sinusoidal_visibility(b) == pytest.approx(sinusoidal_visibility(a), rel=1e-9)
    assert wrap(fringe_phase(b) - fringe_phase(a)) == pytest.approx(0.0, abs=1e-9)


def test_counts_bounded_by_open_fractions():
    cfg = config("coherent_absorption")
    scan = fringe_scan(cfg, velocity(cfg, 1.1), workers=1)
    f = sampled_open_fraction(cfg)
    assert np.all(scan.counts >= 0)
    assert np.all(scan.counts <= f + 1e-9)
    assert scan.counts.mean() <= f * f + 1e-9


def test_phase_only_conserves_flux_between_g1_and_g3():
    cfg = config("phase_only")
    scan = fringe_scan(cfg, velocity(cfg, 1.3), workers=1)
    f = sampled_open_fraction(cfg)
    # 64 offsets sample the correlation; higher harmonics alias into the mean
    assert scan.counts.mean() == pytest.approx(f * f, rel=1e-6)


def test_absorption_models_approach_phase_only_as_n0_vanishes():
    xi = 1.3
    ref_cfg = config("phase_only", coarse=True)
    ref = sinusoidal_visibility(fringe_scan(ref_cfg, velocity(ref_cfg, xi), workers=1))
    for model in ("coherent_absorption", "incoherent_absorption"):
        gaps = []
        for n0 in (0.1, 0.01, 0.001):
            cfg = config(model, n0=n0, coarse=True)
            gaps.append(abs(sinusoidal_visibility(fringe_scan(cfg, velocity(cfg, xi), workers=1)) - ref))
        assert gaps[2] < gaps[1] < gaps[0]
        assert gaps[2] < 1e-3


def test_models_separate_at_fixed_absorption():
    xis = [0.8, 1.3, 1.8]
    curves = {}
    for model in ("phase_only", "incoherent_absorption", "coherent_absorption"):
        cfg = config(model, coarse=True)
        curves[model] = np.array([sinusoidal_visibility(fringe_scan(cfg, velocity(cfg, x), workers=1))
                                  for x in xis])
    for a, b in (("phase_only", "incoherent_absorption"), ("phase_only", "coherent_absorption"),
                 ("incoherent_absorption", "coherent_absorption")):
        assert np.max(np.abs(curves[a] - curves[b])) > 1e-2


def test_source_sampling_converges():
    xi = 1.3
    values = []
    for points in (8, 16, 64):
        cfg = config("coherent_absorption", n_source_points=points, n_source_slits=8)
        values.append(sinusoidal_visibility(fringe_scan(cfg, velocity(cfg, xi), workers=1)))
    f = sampled_open_fraction(config())
    expect = talbot_lau_visibility(2.0, 0.2, xi, f, f)
    # emitters tile the open slit, so even a few per slit reproduce the oracle
    assert values == pytest.approx([expect] * 3, abs=2e-5)


def test_velocity_averaging_lowers_contrast_of_sharp_features():
    cfg = config("phase_only", coarse=True, velocity_quadrature=1)
    avg = replace(cfg, source=BeamSource(1e-3, 1.0, VelocityDistribution("gaussian", 150.0, 30.0)),
                  velocity_quadrature=9)
    v = velocity(cfg, 1.5)
    single = fringe_scan(cfg, v, workers=1)
    smeared = fringe_scan(avg, v, workers=1)
    assert smeared.velocity_marginal.shape == (9, cfg.n_offsets)
    assert sinusoidal_visibility(smeared) < sinusoidal_visibility(single)


def test_curve_is_thread_count_invariant():
    cfg = config("incoherent_absorption", coarse=True)
    v = velocity_for_scaled_length(cfg.L, D, C70.mass, np.array([2.0, 1.4, 0.9]))
    a = visibility_curve(cfg, v, workers=1)
    b = visibility_curve(cfg, v, workers=3)
    assert np.array_equal(a.visibility, b.visibility)
    assert a.model == "incoherent_absorption"
    assert a.x_axis == pytest.approx([2.0, 1.4, 0.9], rel=1e-12)


def test_config_validation():
    with pytest.raises(DomainError):
        config(model="quantum")
    with pytest.raises(DomainError):
        replace(config(), g1=NanoGrating(1.001 * D, 110e-9, 190e-9))
    # 10 ppm is tolerated
    replace(config(), g1=NanoGrating(1.00001 * D, 110e-9, 190e-9))
    with pytest.raises(ResolutionError):
        config(n_offsets=48)
    with pytest.raises(DomainError):
        visibility_curve(config(coarse=True), [100.0, 50.0])


def test_visibility_needs_signal():
    scan = FringeScan(np.arange(16.0), np.zeros(16), D, 1.0)
    with pytest.raises(DomainError):
        sinusoidal_visibility(scan)
    with pytest.raises(ResolutionError):
        sinusoidal_visibility(FringeScan(np.arange(8.0), np.ones(8), D, 1.0))


def test_pure_cosine_scan_visibility():
    x = np.arange(64) / 64
    scan = FringeScan(x * D, 1 + 0.3 * np.cos(2 * math.pi * x), D, 1.0)
    assert sinusoidal_visibility(scan) == pytest.approx(0.3, abs=1e-14)


def test_phase_only_visibility_law_is_bessel_j2():
    from scipy.special import jv

    cfg = config("phase_only", phi0=1.2)
    f = sampled_open_fraction(cfg)
    for xi in (0.4, 1.0, 2.3):
        vis = sinusoidal_visibility(fringe_scan(cfg, velocity(cfg, xi), workers=1))
        law = 2 * np.sinc(f) ** 2 * abs(jv(2, 1.2 * math.sin(math.pi * xi)))
        assert vis == pytest.approx(law, rel=2e-3, abs=2e-4)
