"""Bounded multi-start least squares and the spin-Hamiltonian forward models.

Each local search is a bounded Nelder-Mead simplex in the unit-scaled box,
restarted from its own optimum until the relative residual decrease drops
below `ftol`. Starts are the initial guess followed by scrambled Sobol
points of the box.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from . import orientation
from .spincore import SpinSystem
from .thermo import heat_capacity
from .units import CHI_MOLAR_PER_MUB_T, KELVIN_PER_CM


class FitWarning(UserWarning):
    pass


@dataclass
class Dataset:
    """Measured response with its control variables (e.g. T, H, angle)."""

    controls: dict
    values: np.ndarray
    sigma: Optional[np.ndarray] = None
    kind: str = "M"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.atleast_1d(np.asarray(self.values, dtype=float))
        n = self.values.size
        if n < 1:
            raise ValueError("dataset has no points")
        self.controls = {
            k: np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy() for k, v in self.controls.items()
        }
        if self.sigma is not None:
            self.sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), (n,)).copy()
            if np.any(self.sigma <= 0):
                raise ValueError("sigma must be positive")

    def __len__(self):
        return self.values.size


@dataclass
class FitProblem:
    """Model, free parameters {name: (lo, hi, init)}, fixed parameters, search settings.

    `model(params, dataset)` returns predictions for one dataset.
    """

    model: Callable
    free: dict
    fixed: dict = field(default_factory=dict)
    n_starts: int = 16
    seed: int = 0
    ftol: float = 1e-10
    max_evals: int = 2000
    starts: Optional[list] = None

    def __post_init__(self):
        for name, (lo, hi, init) in self.free.items():
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"bounds of {name!r} must be finite with lo < hi")
            if not lo <= init <= hi:
                raise ValueError(f"initial value of {name!r} lies outside its bounds")

    @property
    def names(self):
        return list(self.free)

    @property
    def bounds(self):
        lo = np.array([v[0] for v in self.free.values()], dtype=float)
        hi = np.array([v[1] for v in self.free.values()], dtype=float)
        return lo, hi

    def start_points(self):
        lo, hi = self.bounds
        init = np.array([v[2] for v in self.free.values()], dtype=float)
        if self.starts is not None:
            return [np.clip(np.asarray(s, dtype=float), lo, hi) for s in self.starts]
        pts = [init]
        if self.n_starts > 1:
            pts += list(qmc.scale(_sobol(len(lo), self.n_starts - 1, self.seed), lo, hi))
        return pts


def _sobol(d, n, seed):
    # draw a power-of-two block to keep the sequence balanced, use the first n
    m = max(int(np.ceil(np.log2(max(n, 1)))), 0)
    return qmc.Sobol(d, scramble=True, seed=seed).random_base2(m)[:n]


@dataclass
class StartOutcome:
    index: int
    start: np.ndarray
    params: np.ndarray
    residual: float
    nfev: int
    converged: bool


@dataclass
class FitResult:
    names: list
    params: dict
    residual: float
    starts: list
    covariance: Optional[np.ndarray]
    status: str
    n_points: int = 0
    reduced_chi2: Optional[float] = None

    @property
    def x(self):
        return np.array([self.params[n] for n in self.names])

    @property
    def stderr(self):
        if self.covariance is None:
            return None
        return dict(zip(self.names, np.sqrt(np.clip(np.diag(self.covariance), 0, None))))

    def to_dict(self):
        return {
            "status": self.status,
            "params": self.params,
            "residual": self.residual,
            "reduced_chi2": self.reduced_chi2,
            "stderr": self.stderr,
            "starts": [
                {"index": s.index, "start": s.start.tolist(), "params": s.params.tolist(),
                 "residual": s.residual, "nfev": s.nfev, "converged": s.converged}
                for s in self.starts
            ],
        }


def _residual_vector(problem: FitProblem, data, x):
    p = dict(problem.fixed)
    p.update(zip(problem.names, x))
    parts = []
    for ds in data:
        pred = np.asarray(problem.model(p, ds), dtype=float)
        r = pred - ds.values
        if ds.sigma is not None:
            r = r / ds.sigma
        parts.append(r)
    return np.concatenate(parts)


def _local_search(f, x0, lo, hi, ftol, max_evals):
    span = hi - lo
    fun = lambda u: f(lo + np.clip(u, 0, 1) * span)
    u = (x0 - lo) / span
    best = fun(u)
    nfev = 1
    converged = False
    while nfev < max_evals:
        with np.errstate(invalid="ignore"):  # inf - inf in the simplex spread test
            res = optimize.minimize(
                fun, u, method="Nelder-Mead", bounds=[(0, 1)] * len(u),
                options={"xatol": 1e-10, "fatol": ftol * max(best, 1e-300) if np.isfinite(best) else 1e-300,
                         "maxfev": max_evals - nfev, "adaptive": len(u) > 2},
            )
        nfev += res.nfev
        if not np.isfinite(res.fun) or res.fun > best:
            break
        improvement = best - res.fun
        u, best = np.clip(res.x, 0, 1), res.fun
        if improvement <= ftol * max(abs(best), 1e-300) or best == 0.0:
            converged = True
            break
    return lo + u * span, best, nfev, converged


def _jacobian(problem, data, x, lo, hi):
    r0 = _residual_vector(problem, data, x)
    J = np.empty((r0.size, x.size))
    for k in range(x.size):
        h = 1e-6 * (hi[k] - lo[k])
        xp, xm = x.copy(), x.copy()
        xp[k] = min(x[k] + h, hi[k])
        xm[k] = max(x[k] - h, lo[k])
        J[:, k] = (_residual_vector(problem, data, xp) - _residual_vector(problem, data, xm)) / (xp[k] - xm[k])
    return J


def least_squares(problem: FitProblem, data) -> FitResult:
    """Multi-start bounded derivative-free least squares.

    Non-finite model output makes a trial point infinitely bad; the search
    carries on. The best start wins, ties going to the lowest start index.
    """
    data = [data] if isinstance(data, Dataset) else list(data)
    lo, hi = problem.bounds

    def objective(x):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                r = _residual_vector(problem, data, x)
        except (ValueError, FloatingPointError, np.linalg.LinAlgError):
            return np.inf
        s = float(r @ r)
        return s if np.isfinite(s) else np.inf

    outcomes = []
    for k, x0 in enumerate(problem.start_points()):
        x, fval, nfev, conv = _local_search(objective, x0, lo, hi, problem.ftol, problem.max_evals)
        outcomes.append(StartOutcome(k, np.asarray(x0), x, float(fval), nfev, conv))
    finite = [o for o in outcomes if np.isfinite(o.residual)]
    n = sum(len(d) for d in data)
    if not finite:
        return FitResult(problem.names, {}, np.inf, outcomes, None, "failed", n)
    best = min(finite, key=lambda o: (o.residual, o.index))
    cov, red = None, None
    p = len(problem.names)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            J = _jacobian(problem, data, best.params, lo, hi)
        weighted = all(d.sigma is not None for d in data)
        dof = max(n - p, 1)
        s2 = 1.0 if weighted else best.residual / dof
        cov = np.linalg.pinv(J.T @ J) * s2
        if weighted:
            red = best.residual / dof
    except (ValueError, np.linalg.LinAlgError):
        pass
    status = "converged" if best.converged else "max-evals"
    return FitResult(problem.names, dict(zip(problem.names, best.params.tolist())), best.residual,
                     outcomes, cov, status, n, red)


# --- forward models --------------------------------------------------------


def _system(params, S=1.0):
    return SpinSystem(S, params["D"] * KELVIN_PER_CM, params.get("E", 0.0) * KELVIN_PER_CM, params.get("g", 2.0))


class PowderMagnetization:
    """Powder-averaged M (mu_B) at dataset controls H (tesla) and T (kelvin).

    Parameters: D, E (cm^-1), g, tip (cm^3/mol), optional S.
    """

    def __init__(self, n_points=100):
        self.orient = orientation.generate_orientations(orientation.RandomPowder(n_points))

    def __call__(self, params, ds: Dataset):
        sys = _system(params, params.get("S", 1.0))
        H, T = ds.controls["H"], ds.controls["T"]
        Hu, hi = np.unique(H, return_inverse=True)
        Tu, ti = np.unique(T, return_inverse=True)
        m = orientation.averaged_magnetization(sys, self.orient, Hu, Tu)
        tip = params.get("tip", 0.0) / CHI_MOLAR_PER_MUB_T
        return m[hi, ti] + tip * H


class AngleHeatCapacity:
    """c/R of one site with the field at polar angle `theta` (degrees) from z, in the xz plane.

    Parameters: theta, D, E (cm^-1), g; controls T, H.
    """

    def __call__(self, params, ds: Dataset):
        sys = _system(params, params.get("S", 1.0))
        th = np.radians(params["theta"])
        H, T = ds.controls["H"], ds.controls["T"]
        out = np.empty_like(T)
        for h in np.unique(H):
            sel = H == h
            field = h * np.array([np.sin(th), 0.0, np.cos(th)])
            E = orientation.spincore.spectra(sys, field)[0]
            out[sel] = heat_capacity(E, T[sel])
        return out


class PowderChiT:
    """Powder chi*T (cm^3 K/mol) with additive TIP; controls T and H."""

    def __init__(self, n_points=100):
        self.orient = orientation.generate_orientations(orientation.RandomPowder(n_points))

    def __call__(self, params, ds: Dataset):
        sys = _system(params, params.get("S", 1.0))
        H, T = ds.controls["H"], ds.controls["T"]
        out = np.empty_like(T)
        for h in np.unique(H):
            sel = H == h
            chi = orientation.averaged_susceptibility(sys, self.orient, T[sel], h)
            out[sel] = (chi + params.get("tip", 0.0)) * T[sel]
        return out


MODELS = {
    "powder_magnetization": PowderMagnetization,
    "heatcap_angle": AngleHeatCapacity,
    "powder_chiT": PowderChiT,
}


# --- paper-specific fits ---------------------------------------------------


@dataclass
class ZfsBranch:
    D: float
    E: float
    residual: float
    rms_relative: float
    start_index: int


@dataclass
class ZfsFitReport:
    result: FitResult
    negative: Optional[ZfsBranch]
    positive: Optional[ZfsBranch]
    sign_ambiguous: bool
    flags: list = field(default_factory=list)


class _RatioPowderMagnetization(PowderMagnetization):
    # E enters as the ratio r = E/|D| in [0, 1/3], which keeps every trial
    # point in standard form so that the sign of D is meaningful
    def __call__(self, params, ds):
        p = dict(params)
        p["E"] = p.pop("r") * abs(p["D"])
        return super().__call__(p, ds)


def fit_zfs_powder_magnetization(data, g=2.16, tip=1e-4, n_starts=16, seed=0, D_bounds=(-5.0, 5.0),
                                 n_points=100, max_evals=2000, ambiguity_rms=0.01):
    """Fit D and |E| (cm^-1) to powder magnetization isotherms at fixed g and TIP.

    |E| is searched as a fraction of |D| between 0 and 1/3. Half of the
    starts are seeded with D < 0 and half with D > 0, and the best outcome
    ending on each side is reported as a branch.

    Returns
    -------
    ZfsFitReport
        `sign_ambiguous` is set when both branches reproduce the data with
        an rms residual below `ambiguity_rms` times the rms of the data.
    """
    data = [data] if isinstance(data, Dataset) else list(data)
    flags = []
    temps = np.unique(np.concatenate([d.controls["T"] for d in data]))
    if temps.size < 2:
        flags.append("single-temperature")
        warnings.warn("magnetization at a single temperature barely constrains D", FitWarning, stacklevel=2)
    half = max(n_starts // 2, 1)
    u = _sobol(2, half, seed)
    starts = []
    for Dlo, Dhi in ((D_bounds[0], -0.05), (0.05, D_bounds[1])):
        starts += [[Dlo + a * (Dhi - Dlo), b / 3.0] for a, b in u]
    problem = FitProblem(
        _RatioPowderMagnetization(n_points),
        {"D": (D_bounds[0], D_bounds[1], starts[0][0]), "r": (0.0, 1.0 / 3.0, starts[0][1])},
        {"g": g, "tip": tip},
        n_starts=len(starts), seed=seed, max_evals=max_evals, starts=starts,
    )
    result = least_squares(problem, data)
    values = np.concatenate([d.values for d in data])
    scale = np.sqrt(np.mean(values**2)) or 1.0

    def branch(sign):
        outs = [o for o in result.starts if np.sign(o.params[0]) == sign and np.isfinite(o.residual)]
        if not outs:
            return None
        o = min(outs, key=lambda o: (o.residual, o.index))
        D = float(o.params[0])
        rms = np.sqrt(o.residual / values.size) / scale
        return ZfsBranch(D, float(o.params[1] * abs(D)), o.residual, float(rms), o.index)

    neg, pos = branch(-1), branch(1)
    ambiguous = neg is not None and pos is not None and max(neg.rms_relative, pos.rms_relative) < ambiguity_rms
    if ambiguous:
        flags.append("sign-ambiguous")
    return ZfsFitReport(result, neg, pos, ambiguous, flags)


@dataclass
class AngleFitReport:
    angle: float
    result: FitResult
    flags: list = field(default_factory=list)


def fit_axis_angle_from_heatcap(data, sys: SpinSystem, fit_zfs=False, angle_bounds=(0.0, 90.0), n_starts=8,
                                seed=0, max_evals=2000):
    """Fit the polar angle (degrees) between the easy axis and the field to c(T, H) curves.

    D, E of `sys` are held fixed unless `fit_zfs` is set, in which case they
    are refined within +-50% of their starting values.
    """
    data = [data] if isinstance(data, Dataset) else list(data)
    flags = []
    fields = np.unique(np.concatenate([d.controls["H"] for d in data]))
    if np.all(fields == 0):
        flags.append("angle-unidentifiable")
        warnings.warn("zero-field data carry no information on the field angle", FitWarning, stacklevel=2)
    elif fields.size < 3 or fields.max() < 0.5:
        flags.append("weak-leverage")
        warnings.warn("need at least 3 fields including one >= 0.5 T to pin the angle", FitWarning, stacklevel=2)
    D = sys.D / KELVIN_PER_CM
    E = sys.E / KELVIN_PER_CM
    free = {"theta": (angle_bounds[0], angle_bounds[1], 0.5 * (angle_bounds[0] + angle_bounds[1]))}
    fixed = {"g": sys.g[2], "S": sys.S}
    if fit_zfs:
        free["D"] = tuple(sorted((0.5 * D, 1.5 * D))) + (D,)
        free["E"] = (0.0, max(1.5 * abs(E), 1e-3), abs(E))
    else:
        fixed.update(D=D, E=E)
    problem = FitProblem(AngleHeatCapacity(), free, fixed, n_starts=n_starts, seed=seed, max_evals=max_evals)
    result = least_squares(problem, data)
    return AngleFitReport(result.params.get("theta", float("nan")), result, flags)
