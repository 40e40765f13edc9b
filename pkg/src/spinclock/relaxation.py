"""Spin relaxation: Cole-Cole ac susceptibility, direct + Raman T1, Rabi rates."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .units import MUB_OVER_H


class IllConditionedFit(UserWarning):
    pass


@dataclass(frozen=True)
class ColeColeParams:
    chi_T: float
    chi_S: float
    tau: float
    beta: float = 1.0

    def __post_init__(self):
        if not self.chi_T >= self.chi_S >= 0:
            raise ValueError("need chi_T >= chi_S >= 0")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")

    def as_array(self):
        return np.array([self.chi_T, self.chi_S, self.tau, self.beta])


def cole_cole_eval(p: ColeColeParams, omega):
    """In-phase and out-of-phase susceptibility at angular frequency omega (rad/s)."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("angular frequency must be non-negative")
    x = (omega * p.tau) ** p.beta
    c, s = np.cos(np.pi * p.beta / 2), np.sin(np.pi * p.beta / 2)
    den = 1 + 2 * x * c + x * x
    dchi = p.chi_T - p.chi_S
    return p.chi_S + dchi * (1 + x * c) / den, dchi * x * s / den


@dataclass
class ColeColeFit:
    params: ColeColeParams
    covariance: np.ndarray
    residual: float
    flags: list = field(default_factory=list)

    @property
    def stderr(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))


def cole_cole_fit(omega, chi_re, chi_im, init=None, bounds=None, sigma=None):
    """Joint least-squares fit of (chi', chi'') to the Cole-Cole form.

    Parameters are fitted as (chi_T, chi_S, log tau, beta); the returned
    covariance is for (chi_T, chi_S, tau, beta). `bounds` maps parameter
    names to (lo, hi); beta defaults to [0.5, 1].
    """
    omega = np.asarray(omega, dtype=float)
    chi_re = np.asarray(chi_re, dtype=float)
    chi_im = np.asarray(chi_im, dtype=float)
    if omega.size < 4:
        raise ValueError("need at least 4 frequency points")
    sig = np.ones_like(omega) if sigma is None else np.asarray(sigma, dtype=float)
    flags = []
    scale = max(np.max(np.abs(chi_re)), np.max(np.abs(chi_im)), 1e-300)
    if np.max(np.abs(chi_im)) <= 1e-12 * scale:
        flags.append("no-dispersion")
        warnings.warn("chi'' vanishes: tau is unidentifiable", IllConditionedFit, stacklevel=2)
    b = {"chi_T": (0.0, np.inf), "chi_S": (0.0, np.inf), "tau": (1e-12, 1e6), "beta": (0.5, 1.0)}
    b.update(bounds or {})
    if init is None:
        k = int(np.argmax(chi_im))
        tau0 = 1.0 / omega[k] if omega[k] > 0 else 1.0
        init = ColeColeParams(max(chi_re.max(), 0.0), max(min(chi_re.min(), chi_re.max()), 0.0), tau0, 0.97)
    lo = [b["chi_T"][0], b["chi_S"][0], np.log(b["tau"][0]), b["beta"][0]]
    hi = [b["chi_T"][1], b["chi_S"][1], np.log(b["tau"][1]), b["beta"][1]]
    x0 = np.clip([init.chi_T, init.chi_S, np.log(init.tau), init.beta], lo, hi)

    def resid(q):
        x = (omega * np.exp(q[2])) ** q[3]
        c, s = np.cos(np.pi * q[3] / 2), np.sin(np.pi * q[3] / 2)
        den = 1 + 2 * x * c + x * x
        d = q[0] - q[1]
        r1 = q[1] + d * (1 + x * c) / den - chi_re
        r2 = d * x * s / den - chi_im
        return np.concatenate([r1, r2]) / np.concatenate([sig, sig])

    res = optimize.least_squares(resid, x0, bounds=(lo, hi), x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10000)
    q = res.x
    JtJ = res.jac.T @ res.jac
    dof = max(2 * omega.size - 4, 1)
    s2 = 1.0 if sigma is not None else 2 * res.cost / dof
    cov_q = np.linalg.pinv(JtJ) * s2
    # tau = exp(q2): propagate to linear tau
    jac = np.diag([1.0, 1.0, np.exp(q[2]), 1.0])
    cov = jac @ cov_q @ jac.T
    tau = float(np.exp(q[2]))
    if omega.min() * tau > 1 or omega.max() * tau < 1:
        flags.append("peak-not-bracketed")
        warnings.warn("data do not bracket the chi'' maximum; tau is poorly constrained", IllConditionedFit, stacklevel=2)
        cov = cov * 4.0
    chi_T, chi_S = float(q[0]), float(min(q[1], q[0]))
    return ColeColeFit(ColeColeParams(chi_T, chi_S, tau, float(q[3])), cov, float(2 * res.cost), flags)


@dataclass(frozen=True)
class T1Model:
    """Spin-lattice rate 1/T1 = A_dir T + A_Raman T^4 (s^-1)."""

    A_dir: float = 0.0
    A_raman: float = 0.0

    def __post_init__(self):
        if self.A_dir < 0 or self.A_raman < 0:
            raise ValueError("relaxation coefficients must be non-negative")

    def rate(self, T):
        T = np.asarray(T, dtype=float)
        return self.A_dir * T + self.A_raman * T**4


def t1_eval(m: T1Model, T):
    """T1 in seconds; infinite (with a warning) when both coefficients vanish."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("temperature must be positive")
    rate = m.rate(T)
    if np.any(rate == 0):
        warnings.warn("zero relaxation rate: T1 is infinite", RuntimeWarning, stacklevel=2)
    with np.errstate(divide="ignore"):
        out = 1.0 / rate
    return float(out) if out.ndim == 0 else out


@dataclass
class T1Fit:
    model: T1Model
    covariance: np.ndarray
    clipped: bool = False


def t1_fit(T, T1, sigma=None):
    """Linear least squares of 1/T1 on the basis {T, T^4}, clipped to >= 0.

    `sigma` are uncertainties of T1; they are propagated to the rate.
    """
    T = np.asarray(T, dtype=float)
    T1 = np.asarray(T1, dtype=float)
    if T.size < 3:
        raise ValueError("need at least 3 temperatures")
    rate = 1.0 / T1
    w = np.ones_like(T) if sigma is None else T1**2 / np.asarray(sigma, dtype=float)
    A = np.column_stack([T, T**4]) * w[:, None]
    y = rate * w
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    clipped = False
    # negatives at round-off level relative to the largest rate are plain zeros
    basis_max = np.array([T.max(), T.max() ** 4])
    tiny = (coef < 0) & (np.abs(coef) * basis_max <= 1e-9 * rate.max())
    coef[tiny] = 0.0
    if np.any(coef < 0):
        warnings.warn(f"negative best-fit coefficient {coef}; refitting with non-negativity", RuntimeWarning, stacklevel=2)
        coef, _ = optimize.nnls(A, y)
        clipped = True
    r = y - A @ coef
    dof = max(T.size - 2, 1)
    s2 = 1.0 if sigma is not None else float(r @ r) / dof
    cov = np.linalg.pinv(A.T @ A) * s2
    return T1Fit(T1Model(float(coef[0]), float(coef[1])), cov, clipped)


def rabi_frequency(g, b_z, S):
    """Clock-transition Rabi frequency 2 g mu_B b_z S / h.

    Returns (linear frequency in Hz, angular frequency in rad/s).
    """
    if b_z < 0:
        raise ValueError("b_z must be positive")
    f = 2.0 * g * MUB_OVER_H * b_z * S
    return f, 2 * np.pi * f
