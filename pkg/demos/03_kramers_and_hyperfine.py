"""A half-integer spin keeps its doublets at zero field; nuclear coupling alone is too weak
to fake a tunnelling anomaly near 0.3 K."""
# %%
from spinclock import presets, spincore, thermo
from spinclock.units import from_kelvin

p = presets.get("complex2")
lv = spincore.levels(p.system, vectors=False)
for idx in lv.groups():
    print(f"{from_kelvin(lv.energies[idx[0]], 'cm-1'):9.4f} cm-1  x{len(idx)}")

# %%
hf = thermo.hyperfine_specific_heat_bound(p.hyperfine_mK * 1e-3, p.S, p.I, thermo.log_grid(0.002, 2, 400))
print(f"hyperfine Schottky peak at {hf.peak() * 1e3:.1f} mK")
for T in (0.1, 0.2, 0.3, 0.5):
    i = abs(hf.x - T).argmin()
    print(f"  c/R({hf.x[i]:.3f} K) = {hf.values[i]:.4f}")
