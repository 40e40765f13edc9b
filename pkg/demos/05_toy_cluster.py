"""Seven coupled S = 1 molecules: the tunnel gap quenches the interaction anomaly."""
# %%
import time

from spinclock import cluster, presets, thermo
from spinclock.spincore import SpinSystem
from spinclock.units import KELVIN_PER_CM

J = presets.J_INTER_CM * KELVIN_PER_CM
grid = thermo.log_grid(0.005, 0.5, 200)
for label, sys in (("gap 2.9 cm-1", presets.get("complex1").system),
                   ("no gap", SpinSystem.from_units(1, -100.0, 0.0, 2.2))):
    t = time.perf_counter()
    m = cluster.ClusterModel.star(sys, J)
    lv = cluster.cluster_levels(m)
    c = cluster.cluster_specific_heat(m, grid, lv)
    print(f"{label:13s} dim {m.dim}, ground x{lv.degeneracies()[0]}, "
          f"max c/R per site {c.values.max() / m.n_sites:.4f} at {c.peak():.3f} K ({time.perf_counter() - t:.1f} s)")

# %%
r = cluster.quantum_decoupling_ratio(2.9 * KELVIN_PER_CM, 12, J, 1)
print(f"gap / (Z|J|S^2/2) = {r:.1f}")
