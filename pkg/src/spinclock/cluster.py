"""Exact diagonalization of small clusters of coupled anisotropic spins.

    H = sum_k h_k  -  sum_{bonds (i,j)} J_ij S_z,i S_z,j

with h_k the single-molecule Hamiltonian of site k embedded by Kronecker
products. Each bond enters once with coupling J_ij, which is the
Ising lattice energy -(J/2) sum_i sum_{j in Z(i)} S_z,i S_z,j written
without double counting.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .spincore import LevelSet, SpinSystem, build_hamiltonian, diagonalize, spin_operators
from .thermo import ThermoCurve, heat_capacity, temperature_grid

MAX_DIM = 10_000


class ClusterTooLargeError(MemoryError):
    pass


def star_ring_bonds(J, n_outer=6, ring=True):
    """Bonds of a central site 0 to sites 1..n_outer, plus the outer ring if asked."""
    bonds = [(0, k, J) for k in range(1, n_outer + 1)]
    if ring:
        bonds += [(k, k % n_outer + 1, J) for k in range(1, n_outer + 1)]
    return bonds


@dataclass
class ClusterModel:
    sites: list
    bonds: list
    field: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.sites = list(self.sites)
        n = len(self.sites)
        seen = set()
        for i, j, _ in self.bonds:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"bond ({i}, {j}) does not join two distinct sites")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate bond {key}")
            seen.add(key)
        if self.dim > MAX_DIM:
            raise ClusterTooLargeError(f"Hilbert dimension {self.dim} exceeds the cap {MAX_DIM}")

    @classmethod
    def star(cls, sys: SpinSystem, J, n_outer=6, ring=True, field=(0.0, 0.0, 0.0)):
        return cls([sys] * (n_outer + 1), star_ring_bonds(J, n_outer, ring), field)

    @property
    def n_sites(self):
        return len(self.sites)

    @property
    def dims(self):
        return [s.dim for s in self.sites]

    @property
    def dim(self):
        return int(np.prod(self.dims))


def _embed(op, k, dims):
    left = int(np.prod(dims[:k]))
    right = int(np.prod(dims[k + 1 :]))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def _embed_diag(d, k, dims):
    left = int(np.prod(dims[:k]))
    right = int(np.prod(dims[k + 1 :]))
    return np.kron(np.kron(np.ones(left), d), np.ones(right))


def site_sz(model: ClusterModel):
    """Diagonal of S_z for every site in the product basis, shape (n_sites, dim)."""
    dims = model.dims
    out = []
    for k, s in enumerate(model.sites):
        sz = np.real(np.diag(spin_operators(s.S)[2]))
        if s.hyperfine is not None:
            sz = np.repeat(sz, s.dim // s.spin_dim)
        out.append(_embed_diag(sz, k, dims))
    return np.array(out)


def build_cluster_hamiltonian(model: ClusterModel) -> np.ndarray:
    """Dense cluster Hamiltonian in kelvin (real when the field has no y part)."""
    dims = model.dims
    blocks = [build_hamiltonian(s, model.field) for s in model.sites]
    real = all(np.allclose(b.imag, 0.0) for b in blocks)
    dtype = float if real else complex
    H = np.zeros((model.dim, model.dim), dtype=dtype)
    for k, b in enumerate(blocks):
        H += _embed(b.real if real else b, k, dims)
    sz = site_sz(model)
    coupling = np.zeros(model.dim)
    for i, j, J in model.bonds:
        coupling -= J * sz[i] * sz[j]
    H[np.diag_indices_from(H)] += coupling
    return H


def cluster_levels(model: ClusterModel, vectors=False) -> LevelSet:
    return diagonalize(build_cluster_hamiltonian(model), vectors=vectors, check=False)


def cluster_specific_heat(model: ClusterModel, grid, levels=None) -> ThermoCurve:
    """c/R per mole of sites from the full cluster spectrum."""
    T = temperature_grid(grid)
    lv = cluster_levels(model) if levels is None else levels
    c = heat_capacity(lv.energies, T) / model.n_sites
    return ThermoCurve(T, c, "cluster_specific_heat", float(np.linalg.norm(model.field)), "cluster",
                       {"n_sites": model.n_sites, "n_bonds": len(model.bonds)})


def ground_state_sz(model: ClusterModel, levels=None):
    """<S_z,total> in the lowest eigenstate."""
    lv = cluster_levels(model, vectors=True) if levels is None or levels.vectors is None else levels
    psi = lv.vectors[:, 0]
    return float(np.sum(np.abs(psi) ** 2 * site_sz(model).sum(axis=0)))


def quantum_decoupling_ratio(gap, Z, J, S):
    """Ratio of the tunnel gap to the interaction scale Z|J|S^2/2.

    Values above 1 place the lattice in the quantum-paramagnet regime.
    J = 0 returns inf with a warning.
    """
    eps = Z * abs(J) * S**2 / 2
    if eps == 0:
        warnings.warn("no spin-spin coupling: decoupling ratio is infinite", stacklevel=2)
        return float("inf")
    return gap / eps
