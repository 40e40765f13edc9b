"""Single-molecule spin Hamiltonians.

The Hamiltonian of one molecule in a magnetic field H (tesla, molecular
frame) is

    H = mu_B sum_a g_a H_a S_a + D S_z^2 + E (S_x^2 - S_y^2) [+ A S.I]

built in the |S, m_S> (x) |I, m_I> product basis with m running from +S
down to -S. All energies are E/k_B in kelvin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .units import MUB_OVER_KB, to_kelvin

#: levels closer than this (kelvin) are treated as degenerate
DEGENERACY_TOL = 1e-8


class InvalidSpinError(ValueError):
    pass


class ContractViolation(ValueError):
    pass


class UnsupportedFormulaError(ValueError):
    pass


def _check_spin(S, name="S"):
    twice = 2 * S
    if S < 0.5 or abs(twice - round(twice)) > 1e-12:
        raise InvalidSpinError(f"{name}={S!r} is not a positive half-integer")
    return round(twice) / 2


@dataclass(frozen=True)
class Hyperfine:
    """Isotropic hyperfine coupling A S.I (A in kelvin) to a nuclear spin I."""

    A: float
    I: float

    def __post_init__(self):
        object.__setattr__(self, "I", _check_spin(self.I, "I"))


@dataclass(frozen=True)
class SpinSystem:
    """Spin Hamiltonian parameters of one molecule.

    Parameters
    ----------
    S : float
        Spin quantum number (1/2, 1, 3/2, ...).
    D, E : float
        Axial and rhombic zero-field splitting parameters, kelvin.
    g : sequence of 3 floats
        Principal values (g_x, g_y, g_z) of the g-tensor.
    hyperfine : Hyperfine, optional
    """

    S: float
    D: float = 0.0
    E: float = 0.0
    g: tuple = (2.0, 2.0, 2.0)
    hyperfine: Optional[Hyperfine] = None

    def __post_init__(self):
        object.__setattr__(self, "S", _check_spin(self.S))
        g = np.broadcast_to(np.asarray(self.g, dtype=float), (3,))
        object.__setattr__(self, "g", tuple(float(x) for x in g))
        if not (np.isfinite(self.D) and np.isfinite(self.E)):
            raise ValueError("D and E must be finite")
        if abs(self.E) > abs(self.D) / 3 + 1e-15:
            warnings.warn(
                f"|E|={abs(self.E):.4g} K exceeds |D|/3={abs(self.D) / 3:.4g} K; "
                "parameters are not in the conventional ZFS frame",
                stacklevel=3,
            )

    @classmethod
    def from_units(cls, S, D=0.0, E=0.0, g=2.0, unit="cm-1", hyperfine=None):
        """Build from D and E given in `unit` (see :func:`spinclock.units.to_kelvin`)."""
        return cls(S, to_kelvin(D, unit), to_kelvin(E, unit), g, hyperfine)

    @property
    def spin_dim(self):
        return int(round(2 * self.S + 1))

    @property
    def dim(self):
        if self.hyperfine is None:
            return self.spin_dim
        return self.spin_dim * int(round(2 * self.hyperfine.I + 1))

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class FieldVector:
    """Magnetic field (tesla) in the molecular anisotropy frame."""

    components: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        h = np.asarray(self.components, dtype=float).reshape(3)
        if not np.all(np.isfinite(h)):
            raise ValueError(f"non-finite field components {self.components!r}")
        object.__setattr__(self, "components", tuple(float(x) for x in h))

    @classmethod
    def along(cls, magnitude, theta=0.0, phi=0.0):
        """Field of given magnitude at polar angle theta, azimuth phi (radians)."""
        st = np.sin(theta)
        return cls((magnitude * st * np.cos(phi), magnitude * st * np.sin(phi), magnitude * np.cos(theta)))

    @property
    def vector(self):
        return np.array(self.components)

    @property
    def magnitude(self):
        return float(np.linalg.norm(self.components))


def as_field(field) -> np.ndarray:
    """Return field components as a float array of shape (..., 3)."""
    if isinstance(field, FieldVector):
        return field.vector
    h = np.asarray(field, dtype=float)
    if h.shape[-1:] != (3,):
        raise ValueError(f"field must have 3 components, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("non-finite field components")
    return h


@dataclass(frozen=True, eq=False)
class LevelSet:
    """Eigen-spectrum of one Hamiltonian.

    `energies` are ascending with the ground level at 0; `offset` is the
    subtracted ground energy. `vectors[:, i]` is the i-th eigenvector and
    `moments[a, i, j]` = <i|mu_a|j> in Bohr magnetons (a = x, y, z).
    """

    energies: np.ndarray
    offset: float = 0.0
    vectors: Optional[np.ndarray] = None
    moments: Optional[np.ndarray] = None
    degeneracy_tol: float = DEGENERACY_TOL

    def __len__(self):
        return len(self.energies)

    def gap(self, i=0, j=1):
        return float(self.energies[j] - self.energies[i])

    def groups(self):
        """Indices of levels grouped into degenerate multiplets."""
        out = [[0]]
        for k in range(1, len(self.energies)):
            if self.energies[k] - self.energies[out[-1][-1]] < self.degeneracy_tol:
                out[-1].append(k)
            else:
                out.append([k])
        return out

    def degeneracies(self):
        return [len(g) for g in self.groups()]

    def moment_along(self, direction):
        """Matrix <i|mu.n|j> for unit vector n (requires moments)."""
        if self.moments is None:
            raise ValueError("LevelSet was built without moment matrix elements")
        n = np.asarray(direction, dtype=float)
        n = n / np.linalg.norm(n)
        return np.tensordot(n, self.moments, axes=1)


def spin_operators(S):
    """Spin matrices (S_x, S_y, S_z) for spin S in the basis m = S, S-1, ..., -S."""
    S = _check_spin(S)
    m = S - np.arange(int(round(2 * S + 1)))
    # <m+1|S+|m> = sqrt(S(S+1) - m(m+1)); S+ sits on the superdiagonal
    sp = np.diag(np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1)), 1).astype(complex)
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def _electron_ops(sys: SpinSystem):
    """Electron spin operators extended to the full (electron x nuclear) space."""
    sx, sy, sz = spin_operators(sys.S)
    if sys.hyperfine is None:
        return sx, sy, sz
    eye = np.eye(int(round(2 * sys.hyperfine.I + 1)))
    return np.kron(sx, eye), np.kron(sy, eye), np.kron(sz, eye)


def zero_field_hamiltonian(sys: SpinSystem) -> np.ndarray:
    sx, sy, sz = _electron_ops(sys)
    h = sys.D * sz @ sz + sys.E * (sx @ sx - sy @ sy)
    if sys.hyperfine is not None:
        ix, iy, iz = spin_operators(sys.hyperfine.I)
        ex, ey, ez = spin_operators(sys.S)
        h = h + sys.hyperfine.A * (np.kron(ex, ix) + np.kron(ey, iy) + np.kron(ez, iz))
    return h


def moment_operators(sys: SpinSystem) -> np.ndarray:
    """Electronic moment operators mu_a = -g_a S_a, shape (3, d, d), in mu_B."""
    ops = _electron_ops(sys)
    return np.stack([-g * op for g, op in zip(sys.g, ops)])


def build_hamiltonian(sys: SpinSystem, field=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Hamiltonian matrix (kelvin) for `sys` in `field` (tesla, molecular frame).

    `field` may carry leading batch dimensions, shape (..., 3); the result is
    then (..., d, d).
    """
    h = as_field(field)
    mu = moment_operators(sys)
    h0 = zero_field_hamiltonian(sys)
    return h0 - MUB_OVER_KB * np.tensordot(h, mu, axes=([-1], [0]))


def diagonalize(H, vectors=True, moments=None, check=True) -> LevelSet:
    """Diagonalize a Hermitian matrix into a ground-shifted LevelSet.

    If `moments` (3, d, d) is given, its matrix elements between the
    eigenvectors are stored on the result.
    """
    H = np.asarray(H)
    if check:
        scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ContractViolation(f"expected a square matrix, got shape {H.shape}")
        if np.max(np.abs(H - H.conj().T), initial=0.0) > 1e-10 * scale:
            raise ContractViolation("matrix is not Hermitian")
    if vectors or moments is not None:
        w, v = np.linalg.eigh(H)
    else:
        w, v = np.linalg.eigvalsh(H), None
    offset = float(w[0])
    mom = None
    if moments is not None:
        mom = np.einsum("ki,akl,lj->aij", v.conj(), moments, v)
    return LevelSet(w - offset, offset, v if vectors else None, mom)


def levels(sys: SpinSystem, field=(0.0, 0.0, 0.0), vectors=True) -> LevelSet:
    """Spectrum of `sys` in `field`, with moment matrix elements."""
    H = build_hamiltonian(sys, field)
    return diagonalize(H, vectors=vectors, moments=moment_operators(sys), check=False)


def spectra(sys: SpinSystem, fields, vectors=False):
    """Batched eigen-decomposition for fields of shape (n, 3).

    Returns raw (unshifted) eigenvalues of shape (n, d), and eigenvectors
    (n, d, d) if requested.
    """
    H = build_hamiltonian(sys, np.atleast_2d(as_field(fields)))
    if vectors:
        return np.linalg.eigh(H)
    return np.linalg.eigvalsh(H)


def clock_gap(sys: SpinSystem) -> float:
    """Zero-field tunnel splitting 2|E| (kelvin) of an easy-axis S = 1 spin."""
    if sys.S != 1:
        raise UnsupportedFormulaError(
            f"the 2|E| tunnel gap holds for S = 1 only (got S = {sys.S}); use diagonalize"
        )
    if sys.D >= 0:
        warnings.warn("clock_gap assumes an easy-axis (D < 0) spin", stacklevel=2)
    return 2.0 * abs(sys.E)


def zeeman_gap(sys: SpinSystem, Hz):
    """Two-level gap sqrt((2 g_z mu_B S H_z)^2 + Delta^2) in kelvin."""
    delta = clock_gap(sys)
    zeeman = 2.0 * sys.g[2] * MUB_OVER_KB * sys.S * np.asarray(Hz, dtype=float)
    return np.sqrt(zeeman**2 + delta**2)
