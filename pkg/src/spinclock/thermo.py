"""Equilibrium thermodynamics from discrete level spectra.

Specific heat is returned per mole as c/R, magnetization in mu_B per
molecule and susceptibilities in cm^3 mol^-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .spincore import (
    DEGENERACY_TOL,
    LevelSet,
    SpinSystem,
    Hyperfine,
    as_field,
    build_hamiltonian,
    levels as _levels,
    moment_operators,
    spin_operators,
    zero_field_hamiltonian,
)
from .units import CHI_MOLAR_PER_MUB_T, MUB_OVER_KB

#: levels closer than this (kelvin) are treated as one block in the van Vleck sum
VV_DEGENERATE_TOL = 1e-7


class DomainError(ValueError):
    pass


class SingularTermError(ArithmeticError):
    def __init__(self, pair, gap, element):
        self.pair = pair
        super().__init__(
            f"quasi-degenerate levels {pair} (gap {gap:.3g} K) coupled by moment element {element:.3g}"
        )


@dataclass
class ThermoCurve:
    """One observable sampled on an abscissa (T in K or H in T)."""

    x: np.ndarray
    values: np.ndarray
    observable: str
    field: float = 0.0
    scheme: str = "single"
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.shape != self.values.shape:
            raise ValueError("abscissa and values differ in length")

    def __len__(self):
        return len(self.x)

    def peak(self):
        """Abscissa of the maximum, refined by a parabola through 3 samples."""
        return parabolic_peak(self.x, self.values)


def temperature_grid(T) -> np.ndarray:
    """Validate a strictly increasing, positive temperature grid."""
    T = np.atleast_1d(np.asarray(T, dtype=float))
    if T.size and (np.any(T <= 0) or np.any(np.diff(T) <= 0)):
        raise DomainError("temperature grid must be positive and strictly increasing")
    return T


def log_grid(tmin, tmax, n=200):
    return temperature_grid(np.geomspace(tmin, tmax, n))


def parabolic_peak(x, y):
    """Location of max(y), refined by a parabola in x through its neighbours."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    k = int(np.argmax(y))
    if k == 0 or k == len(y) - 1:
        return float(x[k])
    x0, x1, x2 = x[k - 1 : k + 2]
    y0, y1, y2 = y[k - 1 : k + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    if a >= 0:
        return float(x1)
    return float(-b / (2 * a))


def _energies(levels):
    if isinstance(levels, LevelSet):
        return levels.energies
    e = np.asarray(levels, dtype=float)
    return e - e.min(axis=-1, keepdims=True)


def _boltzmann(E, T):
    # E: (..., d), T: (nT,) -> weights (..., nT, d)
    E = E - E.min(axis=-1, keepdims=True)
    w = np.exp(-E[..., None, :] / T[:, None])
    return w / w.sum(axis=-1, keepdims=True)


def heat_capacity(energies, T):
    """c/R for spectra `energies` (..., d) at temperatures T; shape (..., nT)."""
    E = np.asarray(energies, dtype=float)
    T = np.atleast_1d(np.asarray(T, dtype=float))
    E = E - E.min(axis=-1, keepdims=True)
    p = _boltzmann(E, T)
    e1 = np.sum(p * E[..., None, :], axis=-1)
    e2 = np.sum(p * E[..., None, :] ** 2, axis=-1)
    return np.maximum(e2 - e1**2, 0.0) / T**2


def specific_heat(levels, grid, field=0.0, scheme="single") -> ThermoCurve:
    """Schottky specific heat c/R of a discrete spectrum on a temperature grid."""
    T = temperature_grid(grid)
    if T.size == 0:
        return ThermoCurve(T, T.copy(), "specific_heat", field, scheme)
    return ThermoCurve(T, heat_capacity(_energies(levels), T), "specific_heat", field, scheme)


def peak_temperature(energies, tmin, tmax):
    """Temperature of the specific-heat maximum of a spectrum within [tmin, tmax]."""
    E = _energies(energies)
    T = np.geomspace(tmin, tmax, 400)
    c = heat_capacity(E, T)
    k = int(np.argmax(c))
    lo, hi = T[max(k - 1, 0)], T[min(k + 1, len(T) - 1)]
    res = optimize.minimize_scalar(
        lambda lt: -heat_capacity(E, np.exp(lt))[0],
        bounds=(np.log(lo), np.log(hi)),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return float(np.exp(res.x))


def entropy_integral(energies, tmin=None, tmax=None, n=4000):
    """S/R = integral of (c/R)/T dT, with analytic tail corrections.

    The lower limit defaults to a fiftieth of the first excitation gap. Both
    tails are estimated from the asymptotic forms of c: the high-T tail as
    var(E)/(2 T_max^2), the low-T tail by the two-level form of the lowest
    excitation.
    """
    E = np.sort(_energies(energies))
    gaps = E[E > DEGENERACY_TOL]
    if gaps.size == 0:
        return 0.0
    gap = gaps[0]
    tmin = gap / 50 if tmin is None else tmin
    tmax = 1e3 * E[-1] if tmax is None else tmax
    lt = np.linspace(np.log(tmin), np.log(tmax), n)
    c = heat_capacity(E, np.exp(lt))
    s = integrate.simpson(c, x=lt)
    s += np.var(E) / (2 * tmax**2)
    # c/T ~ g1/g0 (gap/T)^2 exp(-gap/T) / T below tmin
    g0 = np.sum(E < DEGENERACY_TOL)
    g1 = np.sum(np.abs(E - gap) < DEGENERACY_TOL)
    y = gap / tmin
    s += g1 / g0 * (y + 1) * np.exp(-y)
    return float(s)


@lru_cache(maxsize=None)
def schottky_root():
    """Root y* of y tanh(y) = 1; the two-level peak sits at k_B T0 = Delta / (2 y*)."""
    return optimize.brentq(lambda y: y * np.tanh(y) - 1.0, 0.5, 2.0, xtol=1e-15, rtol=1e-15)


def t0_from_gap(gap):
    """Peak temperature of a two-level Schottky anomaly with splitting `gap` (K)."""
    gap = np.asarray(gap, dtype=float)
    if np.any(gap <= 0):
        raise DomainError("gap must be positive")
    out = gap / (2 * schottky_root())
    return float(out) if out.ndim == 0 else out


def gap_from_t0(T0):
    """Effective two-level gap (K) whose Schottky maximum sits at T0."""
    T0 = np.asarray(T0, dtype=float)
    if np.any(T0 <= 0):
        raise DomainError("T0 must be positive")
    out = 2 * schottky_root() * T0
    return float(out) if out.ndim == 0 else out


def _direction(field, direction):
    h = as_field(field)
    if direction is not None:
        n = np.asarray(direction, dtype=float)
        return h, n / np.linalg.norm(n)
    norm = np.linalg.norm(h)
    if norm == 0:
        return h, np.array([0.0, 0.0, 1.0])
    return h, h / norm


def _thermal_trace(w, v, op, T):
    # <op> for eigenpairs (w, v) at temperatures T
    diag = np.real(np.einsum("ki,kl,li->i", v.conj(), op, v))
    p = _boltzmann(w, np.atleast_1d(T))
    return p @ diag


def magnetization(sys: SpinSystem, field, T, direction=None):
    """Thermal moment (mu_B/molecule) projected on the field direction.

    Computed as Tr(rho mu.n) over exact eigenstates. A zero field returns 0
    unless an explicit `direction` is given.
    """
    h, n = _direction(field, direction)
    T = np.asarray(T, dtype=float)
    if direction is None and not np.any(h):
        return np.zeros_like(T) if T.ndim else 0.0
    if np.any(T <= 0):
        raise DomainError("temperature must be positive")
    w, v = np.linalg.eigh(build_hamiltonian(sys, h))
    mu_n = np.tensordot(n, moment_operators(sys), axes=1)
    out = _thermal_trace(w, v, mu_n, T)
    return float(out[0]) if T.ndim == 0 else out


def projected_moments(sys: SpinSystem, fields, T, directions=None):
    """Batched magnetization for fields (n, 3) at temperatures T -> (n, nT).

    Each moment is projected on its own field direction, or on `directions`
    (n, 3) when given (needed for zero-field rows).
    """
    h = np.atleast_2d(as_field(fields))
    if directions is None:
        norm = np.linalg.norm(h, axis=1, keepdims=True)
        n = np.divide(h, norm, out=np.zeros_like(h), where=norm > 0)
    else:
        n = np.atleast_2d(np.asarray(directions, dtype=float))
        n = n / np.linalg.norm(n, axis=1, keepdims=True)
    T = np.atleast_1d(np.asarray(T, dtype=float))
    w, v = np.linalg.eigh(build_hamiltonian(sys, h))
    mu = moment_operators(sys)
    mu_n = np.einsum("na,aij->nij", n, mu)
    diag = np.real(np.einsum("nki,nkl,nli->ni", v.conj(), mu_n, v))
    p = _boltzmann(w, T)
    return np.einsum("ntd,nd->nt", p, diag)


def free_energy(sys: SpinSystem, field, T):
    """Helmholtz free energy -T ln Z (kelvin) per molecule."""
    w = np.linalg.eigvalsh(build_hamiltonian(sys, field))
    T = np.asarray(T, dtype=float)
    e0 = w.min()
    return e0 - T * np.log(np.sum(np.exp(-(w - e0) / np.atleast_1d(T)[:, None]), axis=-1)).reshape(T.shape)


def _fd_step(h):
    norm = np.linalg.norm(h)
    return 1e-4 * norm if norm > 0 else 1e-5


def susceptibility_isothermal(sys: SpinSystem, field, T, direction=None):
    """chi_T = dM/dH along the field direction by central difference, cm^3/mol."""
    h, n = _direction(field, direction)
    H = np.linalg.norm(h)
    step = _fd_step(h)
    hp, hm = (H + step) * n, (H - step) * n
    mp = magnetization(sys, hp, T, direction=n)
    mm = magnetization(sys, hm, T, direction=n)
    return CHI_MOLAR_PER_MUB_T * (np.asarray(mp) - np.asarray(mm)) / (2 * step)


def _block_rotate(E, mu, tol):
    """Diagonalize mu inside degenerate blocks of E; returns rotated mu and block labels."""
    labels = np.zeros(len(E), dtype=int)
    for k in range(1, len(E)):
        labels[k] = labels[k - 1] + (E[k] - E[k - 1] >= tol)
    mu = mu.copy()
    for b in np.unique(labels):
        idx = np.flatnonzero(labels == b)
        if len(idx) > 1:
            _, u = np.linalg.eigh(mu[np.ix_(idx, idx)])
            rot = np.eye(len(E), dtype=complex)
            rot[np.ix_(idx, idx)] = u
            mu = rot.conj().T @ mu @ rot
    return mu, labels


def _vv_terms(sys, field, direction, tol, quasi_tol):
    h, n = _direction(field, direction)
    lv = _levels(sys, h)
    E = lv.energies
    mu, labels = _block_rotate(E, lv.moment_along(n), tol)
    gaps = E[None, :] - E[:, None]
    other = labels[None, :] != labels[:, None]
    m2 = np.abs(mu) ** 2
    near = other & (np.abs(gaps) < quasi_tol) & (m2 > 1e-16)
    if np.any(near):
        i, j = np.argwhere(near)[0]
        raise SingularTermError((int(i), int(j)), float(gaps[i, j]), float(np.sqrt(m2[i, j])))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(other, m2 / np.where(other, gaps, 1.0), 0.0)
    return E, np.real(np.diag(mu)), ratio.sum(axis=1)


def susceptibility_vanvleck(sys: SpinSystem, field, T, direction=None, tol=VV_DEGENERATE_TOL, quasi_tol=1e-5):
    """Reversible (frozen-population) van Vleck susceptibility chi_S, cm^3/mol.

    chi_S = 2 sum_i p_i sum_{j not degenerate with i} |<i|mu_h|j>|^2 / (E_j - E_i).
    Degenerate blocks (gap < `tol`) are handled by diagonalizing mu_h inside
    the block. A pair with tol <= gap < `quasi_tol` and nonzero coupling
    raises SingularTermError.
    """
    T = np.asarray(T, dtype=float)
    E, _, vv = _vv_terms(sys, field, direction, tol, quasi_tol)
    p = _boltzmann(E, np.atleast_1d(T))
    out = CHI_MOLAR_PER_MUB_T * 2 * MUB_OVER_KB * (p @ vv)
    return float(out[0]) if T.ndim == 0 else out


def susceptibility_analytic(sys: SpinSystem, field, T, direction=None, tol=VV_DEGENERATE_TOL):
    """Isothermal susceptibility as van Vleck plus population (Curie) term, cm^3/mol."""
    T = np.atleast_1d(np.asarray(T, dtype=float))
    E, mdiag, vv = _vv_terms(sys, field, direction, tol, 0.0)
    p = _boltzmann(E, T)
    curie = (p @ mdiag**2 - (p @ mdiag) ** 2) / T
    return CHI_MOLAR_PER_MUB_T * MUB_OVER_KB * (2 * (p @ vv) + curie)


def chi_t_curve(sys: SpinSystem, field, grid, tip=0.0, direction=None) -> ThermoCurve:
    """chi*T (cm^3 K/mol) on a temperature grid with an additive TIP term."""
    T = temperature_grid(grid)
    chi = np.asarray(susceptibility_isothermal(sys, field, T, direction)) + tip
    h = np.linalg.norm(as_field(field))
    return ThermoCurve(T, chi * T, "chiT", h, meta={"tip": tip})


def debye_specific_heat(theta_d, grid) -> ThermoCurve:
    """Debye lattice specific heat per mole of atoms, c/R."""
    if theta_d <= 0:
        raise DomainError("Debye temperature must be positive")
    T = temperature_grid(grid)

    def integrand(x):
        if x < 1e-8:
            return x**2
        # x^4 e^x / (e^x - 1)^2 written with e^-x to avoid overflow
        em = np.exp(-x)
        return x**4 * em / (1.0 - em) ** 2

    vals = []
    for t in T:
        upper = theta_d / t
        val, _ = integrate.quad(integrand, 0.0, upper, epsabs=0.0, epsrel=1e-10, limit=200)
        vals.append(9.0 * (t / theta_d) ** 3 * val)
    return ThermoCurve(T, np.array(vals), "debye_specific_heat", meta={"theta_D": theta_d})


def hyperfine_levels(A_hf, S, I, mode="full", D=0.0, E=0.0):
    """Spectrum of A S.I (plus optional ZFS) for spin S and nuclear spin I.

    mode='full' diagonalizes the (2S+1)(2I+1) problem; mode='doublet' keeps
    only the Ising part A S_z I_z inside the ground m_S = +-S doublet.
    """
    if mode == "full":
        sys = SpinSystem(S, D, E, hyperfine=Hyperfine(A_hf, I))
        w = np.linalg.eigvalsh(zero_field_hamiltonian(sys))
        return w - w.min()
    if mode == "doublet":
        mI = I - np.arange(int(round(2 * I + 1)))
        w = np.concatenate([A_hf * S * mI, -A_hf * S * mI])
        return np.sort(w - w.min())
    raise ValueError(f"unknown mode {mode!r}")


def hyperfine_specific_heat_bound(A_hf, S, I, grid, mode="full", D=0.0, E=0.0) -> ThermoCurve:
    """Specific heat of the hyperfine-split spectrum (nuclear Schottky)."""
    w = hyperfine_levels(A_hf, S, I, mode, D, E)
    curve = specific_heat(w, grid)
    curve.observable = "hyperfine_specific_heat"
    curve.meta = {"A_hf": A_hf, "S": S, "I": I, "mode": mode}
    return curve
