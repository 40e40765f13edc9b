"""Physical constants and energy-unit conversions.

Energies are carried internally as E/k_B in kelvin. Fields are in tesla,
magnetic moments in Bohr magnetons per molecule and molar susceptibilities
in cm^3 mol^-1 (emu).
"""

import scipy.constants as scc

#: 1 cm^-1 expressed in kelvin (h c / k_B)
KELVIN_PER_CM = scc.h * scc.c * 100.0 / scc.k
#: 1 K expressed in GHz (k_B / h)
GHZ_PER_KELVIN = scc.k / scc.h / 1e9
#: Bohr magneton over Boltzmann constant, K/T
MUB_OVER_KB = scc.physical_constants["Bohr magneton in K/T"][0]
#: Bohr magneton over Planck constant, Hz/T
MUB_OVER_H = scc.physical_constants["Bohr magneton in Hz/T"][0]
#: molar moment (emu/mol) per mu_B per molecule, divided by 1e4 Oe/T.
#: Multiplying dM/dH (mu_B per tesla) by this gives chi in cm^3/mol.
CHI_MOLAR_PER_MUB_T = scc.N_A * scc.physical_constants["Bohr magneton"][0] * 1e3 / 1e4
#: Curie constant prefactor N_A mu_B^2 / (3 k_B) in cm^3 K / mol
CURIE_PREFACTOR = CHI_MOLAR_PER_MUB_T * MUB_OVER_KB / 3.0

_TO_KELVIN = {
    "K": 1.0,
    "cm-1": KELVIN_PER_CM,
    "GHz": 1.0 / GHZ_PER_KELVIN,
    "mK": 1e-3,
}


class UnitError(ValueError):
    pass


def to_kelvin(value, unit="K"):
    """Convert an energy from `unit` ('K', 'mK', 'cm-1' or 'GHz') to kelvin."""
    try:
        return value * _TO_KELVIN[unit]
    except KeyError:
        raise UnitError(f"unknown energy unit {unit!r}") from None


def from_kelvin(value, unit="K"):
    """Inverse of :func:`to_kelvin`."""
    try:
        return value / _TO_KELVIN[unit]
    except KeyError:
        raise UnitError(f"unknown energy unit {unit!r}") from None


def cm_to_kelvin(value):
    return value * KELVIN_PER_CM


def kelvin_to_cm(value):
    return value / KELVIN_PER_CM


def kelvin_to_ghz(value):
    return value * GHZ_PER_KELVIN
