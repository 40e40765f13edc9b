"""Metropolis runs of the ground-doublet Ising model.

The square lattice checks the engine against the exact critical point; the
two 12-neighbour lattices show how much the ordering temperature depends on
the assumed adjacency.
"""
# %%
import numpy as np

from spinclock import latticemc as mc, presets
from spinclock.units import KELVIN_PER_CM

sq = mc.IsingLattice.preset("square4", 24, 1.0, 1.0)
r = mc.metropolis_run(sq, np.linspace(2.0, 2.6, 13), sweeps=4000, burn_in=1000, seed=1)
print(f"square lattice c peak: {mc.estimate_tn(r).tn_peak:.3f} |J| (exact 2.269)")

# %%
J = presets.J_INTER_CM * KELVIN_PER_CM
for name, T in (("bipartite12", np.linspace(0.6, 1.8, 13)), ("fcc12", np.linspace(0.05, 0.5, 10))):
    lat = mc.IsingLattice.preset(name, 6, J, presets.M_EFF)
    r = mc.metropolis_run(lat, T, sweeps=4000, burn_in=1000, seed=2)
    est = mc.estimate_tn(r)
    print(f"{name:12s} L=6 peak {est.tn_peak:.3f} +- {est.err_peak:.3f} K")
