"""Independent reference results used by the test-suite."""
import math

import numpy as np


def talbot_lau_visibility(phi0, n0, xi, open1, open3, model="coherent_absorption", j_max=12, n=512):
    """First-harmonic visibility of a symmetric Talbot-Lau interferometer.

    Incoherent point emitters at G1, equal distances L, G2 classes expanded
    in plane waves of momentum nu h / d (nu half-integer for odd coherent
    classes). ``xi`` is L / L_T with L_T = d^2 / lambda.
    """
    u = (np.arange(2 * n) + 0.5) / n  # x/d over two periods
    c = np.cos(np.pi * u)
    m = np.fft.fftfreq(2 * n, 1.0 / (2 * n))  # frequency index in units of 1/(2d)
    coeff = {}
    for ell in (0, 1):
        total = 0.0
        for j in range(j_max + 1):
            if model == "coherent_absorption":
                t = np.exp(1j * phi0 * c**2 - 0.5 * n0 * c**2) * (1j * math.sqrt(n0) * c) ** j / math.sqrt(math.factorial(j))
            else:
                t = np.exp(1j * phi0 * c**2 - 0.5 * n0 * c**2) * np.sqrt((n0 * c**2) ** j / math.factorial(j))
            if model == "phase_only" and j > 0:
                break
            b = np.fft.fft(t) / (2 * n)
            acc = 0.0
            for idx, mm in enumerate(m):
                partner = int(mm) - 4 * ell
                acc += b[idx] * np.conj(b[partner % (2 * n)]) * np.exp(-2j * np.pi * ell * (mm / 2 - ell) * xi)
            if model == "incoherent_absorption":
                acc *= np.cos(np.pi * ell * xi) ** j
            total += acc
        coeff[ell] = total
    a1 = np.sinc(open1)
    m1 = np.sinc(open3)
    return 2 * abs(coeff[1]) * a1 * m1 / abs(coeff[0])
