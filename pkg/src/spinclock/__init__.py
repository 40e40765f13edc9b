"""spinclock: zero-field-split spin Hamiltonians, their thermodynamics and fits."""

from .spincore import FieldVector, Hyperfine, LevelSet, SpinSystem, clock_gap, levels, spectra, zeeman_gap
from .thermo import ThermoCurve, heat_capacity, schottky_root, specific_heat, t0_from_gap

__version__ = "0.1.0"

__all__ = [
    "FieldVector", "Hyperfine", "LevelSet", "SpinSystem", "ThermoCurve",
    "clock_gap", "heat_capacity", "levels", "schottky_root", "spectra",
    "specific_heat", "t0_from_gap", "zeeman_gap",
]
