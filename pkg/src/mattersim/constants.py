"""CODATA-2018 constants in SI units.

All modules read physical constants from here so that every calculation in the
package uses one consistent table.
"""
import math

h = 6.62607015e-34  # J s (exact)
hbar = h / (2 * math.pi)
k_B = 1.380649e-23  # J/K (exact)
e = 1.602176634e-19  # C (exact)
c = 299792458.0  # m/s (exact)
epsilon_0 = 8.8541878128e-12  # F/m
amu = 1.66053906660e-27  # kg
g = 9.80665  # m/s^2, standard gravity

angstrom3 = 1e-30  # m^3
debye = 3.33564095198e-30  # C m
meV_nm3 = 1e-3 * e * 1e-27  # J m^3


def polarizability_si(alpha_volume_A3):
    """Convert a polarizability volume in cubic angstrom to C m^2/V."""
    return 4 * math.pi * epsilon_0 * alpha_volume_A3 * angstrom3
