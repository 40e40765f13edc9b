"""How a field moves the Schottky peak, and what a partially oriented powder sees."""
# %%
import numpy as np

from spinclock import orientation as ori, presets, spincore, thermo
from spinclock.units import MUB_OVER_KB

sys = presets.get("complex1").system
gap = spincore.clock_gap(sys)

# Field along the easy axis: the gap grows as sqrt((2 g mu_B S H)^2 + gap^2).
print(" H (T)   T0 full (K)   T0 parabola (K)")
for H in np.linspace(0, 3, 7):
    E = spincore.levels(sys, (0, 0, H), vectors=False).energies
    model = thermo.t0_from_gap(np.hypot(2 * sys.g[2] * MUB_OVER_KB * H, gap))
    print(f"{H:5.2f}   {thermo.peak_temperature(E, 0.1, 50):11.4f}   {model:15.4f}")

# %% Cones of easy axes around the field interpolate between crystal and powder.
grid = thermo.log_grid(0.3, 30, 300)
for ap in (0, 30, 60, 90):
    c = ori.averaged_observable(sys, ori.Cone(np.radians(ap)), "specific_heat", grid, 1.0)
    print(f"aperture {ap:2d} deg: T0 = {c.peak():.3f} K, effective gap {ori.effective_gap(c):.3f} K")
powder = ori.averaged_observable(sys, ori.RandomPowder(), "specific_heat", grid, 1.0)
print(f"random powder:   T0 = {powder.peak():.3f} K")
