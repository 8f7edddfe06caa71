"""How big is a C70 matter wave?

Walks through the length, time and momentum scales that decide whether a
fullerene beam can interfere: de Broglie wavelength, coherence lengths,
Talbot scales and the rotational temperature of the molecule.
"""
from mattersim.core import (
    BeamSource,
    VelocityDistribution,
    coherence_lengths,
    de_broglie_wavelength,
    grating_momentum_equivalent,
    kinetic_energy,
    rotational_stats,
    talbot_scales,
)

MASS_AMU = 840.0
V = 158.3
beam = BeamSource(source_width=1e-6, distance_to_first_element=1.55,
                  velocity=VelocityDistribution("gaussian", V, 15.0))

lam = de_broglie_wavelength(MASS_AMU, V)
print(f"C70 at {V} m/s: lambda_dB = {lam * 1e12:.3f} pm, "
      f"kinetic energy {kinetic_energy(MASS_AMU, V):.3f} eV")

# a 10 % velocity spread maps onto a 10 % wavelength spread
scales = coherence_lengths(beam, lam, 0.1 * lam)
print(f"longitudinal coherence {scales['L_c'] * 1e12:.2f} pm, "
      f"transverse coherence {scales['X_c'] * 1e6:.2f} um")

t = talbot_scales(100e-9, lam, MASS_AMU)
print(f"100 nm grating: Talbot length {t['L_T'] * 1e3:.2f} mm, Talbot time {t['T_T'] * 1e6:.1f} us")

print(f"18th diffraction order carries {grating_momentum_equivalent(100e-9, 18, 780e-9):.1f} "
      f"photon recoils at 780 nm")

rot = rotational_stats(1.5e-43, 0.38)
print(f"rotational temperature {rot['B_temp'] * 1e6:.1f} uK; at 0.38 K about J = {rot['J_mean']:.0f}")
