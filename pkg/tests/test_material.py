import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mattersim import constants as const
from mattersim.core import BeamSource, VelocityDistribution, de_broglie_wavelength
from mattersim.errors import DomainError, FitError, QuadratureError, ResolutionError
from mattersim.material import (
    KickModel,
    NanoGrating,
    Screen,
    auto_wall_cutoff,
    c3_from_spectra,
    dephasing_sample,
    detector_image,
    eikonal_transmission,
    effective_slit_width,
    far_field_orders,
    gravity_drop,
    wall_phase,
    width_for_c3,
)
from mattersim.propagation import Grid

D = 100e-9
V = 258.0
LAM = de_broglie_wavelength(514.0, V)
C3 = 17 * const.meV_nm3


def pattern(c3=0.0, slit=50e-9, n=2**14, n_max=30):
    g = NanoGrating(D, slit, 45e-9, c3)
    return g, far_field_orders(eikonal_transmission(g, V, Grid(n, D)), D, LAM, n_max)


@pytest.mark.parametrize("slit", [20e-9, 50e-9, 73e-9])
def test_bare_slit_orders_are_sinc(slit):
    _, pat = pattern(slit=slit, n=1000)
    f = round(slit / D * 1000) / 1000  # width as resolved by the grid
    assert np.max(np.abs(pat.intensity - (f * np.sinc(pat.n * f)) ** 2)) < 1e-12
    assert pat.transmitted == pytest.approx(f, abs=1e-15)
    assert pat.angle[pat.n == 1][0] == pytest.approx(LAM / D)


def test_raw_spectrum_carries_transmitted_probability():
    g = NanoGrating(D, 50e-9, 45e-9, C3)
    t = eikonal_transmission(g, V, Grid(2**14, D))
    raw = np.abs(np.fft.fft(t) / t.size) ** 2
    pat = far_field_orders(t, D, LAM)
    assert raw.sum() == pytest.approx(pat.transmitted, rel=1e-12)
    assert pat.transmitted < g.open_fraction
    assert np.max(np.abs(t)) <= 1.0 + 1e-15


def test_wall_cutoff_sits_at_twenty_pi():
    g = NanoGrating(D, 50e-9, 45e-9, C3)
    cut = auto_wall_cutoff(g, V)
    assert wall_phase(g.c3, g.thickness, V, cut) == pytest.approx(20 * math.pi, rel=1e-12)
    assert auto_wall_cutoff(NanoGrating(D, 50e-9, 45e-9), V) == 0.0
    assert auto_wall_cutoff(NanoGrating(D, 50e-9, 45e-9, C3, wall_cutoff=3e-9), V) == 3e-9


def test_unresolved_cutoff_is_rejected():
    g = NanoGrating(D, 50e-9, 45e-9, C3)
    with pytest.raises(ResolutionError):
        eikonal_transmission(g, V, Grid(64, D))


def test_grid_period_must_match():
    with pytest.raises(ResolutionError):
        eikonal_transmission(NanoGrating(D, 50e-9, 45e-9), V, Grid(256, 2 * D))


def test_far_field_nyquist_guard():
    g = NanoGrating(D, 50e-9, 45e-9)
    with pytest.raises(ResolutionError):
        far_field_orders(eikonal_transmission(g, V, Grid(32, D)), D, LAM, n_max=16)


def test_effective_width_of_bare_slit():
    _, pat = pattern()
    assert effective_slit_width(pat, D) == pytest.approx(50e-9, rel=1e-4)


def test_effective_width_shrinks_with_c3():
    widths = [width_for_c3(NanoGrating(D, 50e-9, 45e-9), V, LAM, c3 * const.meV_nm3)
              for c3 in (0.5, 2.0, 8.0, 17.0)]
    assert np.all(np.diff(widths) < 0)
    assert widths[0] < 50e-9


def test_fully_closed_slit_has_zero_width():
    assert width_for_c3(NanoGrating(D, 50e-9, 45e-9), V, LAM, 1e-45) == 0.0


def test_effective_width_needs_orders():
    _, pat = pattern(n_max=2)
    with pytest.raises(FitError):
        effective_slit_width(pat, D)


def test_c3_constant_spectra_closed_form():
    c3 = c3_from_spectra(lambda w: 100.0, lambda w: 0.5, 1e16)
    expect = const.hbar / (16 * math.pi**2 * const.epsilon_0) * const.polarizability_si(100.0) * 0.5 * 1e16
    assert c3 == pytest.approx(expect, rel=1e-12)


def test_c3_lorentzian_spectrum():
    w0 = 3e15
    c3 = c3_from_spectra(lambda w: 80.0 / (1 + (w / w0) ** 2), lambda w: 1.0, 1e18)
    expect = const.hbar / (16 * math.pi**2 * const.epsilon_0) * const.polarizability_si(80.0) * w0 * math.atan(1e18 / w0)
    assert c3 == pytest.approx(expect, rel=1e-8)


def test_c3_quadrature_failure_is_reported():
    with pytest.raises(QuadratureError):
        c3_from_spectra(lambda w: 1.0 / abs(w - 0.3), lambda w: 1.0, 1.0)


def test_grating_validation():
    with pytest.raises(DomainError):
        NanoGrating(D, 120e-9, 45e-9)
    with pytest.raises(DomainError):
        NanoGrating(D, 50e-9, 45e-9, wall_cutoff=30e-9)
    with pytest.raises(DomainError):
        KickModel(-0.1)


SOURCE = BeamSource(5e-6, 1.0, VelocityDistribution("gaussian", 258.0, 20.0))


def test_detector_conserves_probability_and_sorts_by_velocity():
    g = NanoGrating(D, 50e-9, 45e-9, C3)
    screen = Screen(4096, 256, 4e-6, 2e-6)
    img = detector_image(g, 514.0, SOURCE, 0.56, screen, n_velocities=24, n_samples=4096, workers=1)
    assert img.total + img.clipped_mass == pytest.approx(img.transmitted, abs=1e-13)
    rows = np.flatnonzero(img.grid.sum(axis=1))
    v = img.row_velocity[rows]
    assert np.all(np.diff(v) < 0)  # slower molecules fall further
    y = gravity_drop(v, 1.0, 0.56)
    assert np.all((y >= screen.y_edges[rows]) & (y < screen.y_edges[rows + 1]))
    # symmetric slit: symmetric image about the undeflected beam
    assert np.allclose(img.grid, img.grid[:, ::-1], rtol=0, atol=1e-10 * img.grid.max())


def test_detector_reports_clipping(caplog):
    g = NanoGrating(D, 50e-9, 45e-9)
    with caplog.at_level(logging.WARNING, logger="mattersim.material"):
        img = detector_image(g, 514.0, SOURCE, 0.56, Screen(64, 64, 4e-6, 2e-6), n_velocities=8,
                             n_samples=1024, workers=1)
    assert img.clipped_mass > 0
    assert "clips" in caplog.text


def test_detector_thread_count_invariant():
    g = NanoGrating(D, 50e-9, 45e-9, C3)
    args = (g, 514.0, SOURCE, 0.56, Screen(512, 128, 4e-6, 2e-6))
    a = detector_image(*args, n_velocities=12, n_samples=4096, workers=1)
    b = detector_image(*args, n_velocities=12, n_samples=4096, workers=4)
    assert np.array_equal(a.grid, b.grid)


def fringe(n=512, pitch=1e-6, period=16e-6):
    x = (np.arange(n) + 0.5) * pitch
    return x, 1 + np.cos(2 * math.pi * x / period)


def test_dephasing_without_kicks_is_identity():
    _, f = fringe()
    out = dephasing_sample(f, 1e-6, 16e-6, KickModel(0.0), 1000, seed=1)
    assert np.array_equal(out, f) and out is not f


def test_dephasing_is_seeded():
    _, f = fringe()
    a = dephasing_sample(f, 1e-6, 16e-6, KickModel(0.7), 5000, seed=11)
    b = dephasing_sample(f, 1e-6, 16e-6, KickModel(0.7), 5000, seed=11)
    c = dephasing_sample(f, 1e-6, 16e-6, KickModel(0.7), 5000, seed=12)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("dist,factor", [
    ("gaussian", lambda s: math.exp(-s * s / 2)),
    ("uniform", lambda s: np.sinc(math.sqrt(3) * s / math.pi)),
])
def test_dephasing_reduces_contrast_by_characteristic_function(dist, factor):
    _, f = fringe()
    sigma = 1.2
    out = dephasing_sample(f, 1e-6, 16e-6, KickModel(sigma, dist), 200_000, seed=5)
    h1 = abs(np.fft.rfft(out)[32]) / abs(np.fft.rfft(f)[32])
    assert h1 == pytest.approx(factor(sigma), abs=5e-3)
    assert out.sum() == pytest.approx(f.sum(), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(slit=st.floats(10e-9, 90e-9), c3=st.floats(0.0, 30.0))
def test_transmitted_never_exceeds_open_fraction(slit, c3):
    g = NanoGrating(D, slit, 45e-9, c3 * const.meV_nm3)
    try:
        t = eikonal_transmission(g, V, Grid(2**14, D))
    except ResolutionError:
        return
    pat = far_field_orders(t, D, LAM)
    assert pat.transmitted <= g.open_fraction + 1.0 / 2**14
    assert pat.intensity.sum() <= pat.transmitted + 1e-12
