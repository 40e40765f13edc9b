"""Tunnel splitting of an easy-axis S = 1 molecule and its Schottky peak.

Run with ``python3 demos/01_clock_gap_schottky.py``.
"""
# %%
import numpy as np

from spinclock import presets, spincore, thermo
from spinclock.units import from_kelvin

mol = presets.get("complex1")
sys = mol.system
lv = spincore.levels(sys, vectors=False)
print("zero-field levels (cm-1):", np.round(from_kelvin(lv.energies, "cm-1"), 4))

# %% The lowest pair is split by 2E; that splitting is the clock gap.
gap = spincore.clock_gap(sys)
print(f"gap = {gap:.4f} K = {from_kelvin(gap, 'GHz'):.2f} GHz")

# %% A two-level system peaks where y tanh y = 1 with y = gap / 2T.
T0 = thermo.peak_temperature(lv.energies, 0.1, 20.0)
print(f"c/R maximum at {T0:.4f} K; two-level estimate {thermo.t0_from_gap(gap):.4f} K")

grid = thermo.log_grid(0.3, 20, 12)
curve = thermo.specific_heat(lv, grid)
for T, c in zip(curve.x, curve.values):
    print(f"  T = {T:7.3f} K   c/R = {c:.4f}")
