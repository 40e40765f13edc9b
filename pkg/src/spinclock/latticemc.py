"""Metropolis Monte Carlo for the intermolecular Ising model.

    E = -(J m_eff^2 / 2) sum_i sum_{j in Z(i)} s_i s_j,   s = +-1

on a periodic L_x x L_y x L_z grid whose adjacency is a list of integer
offsets closed under negation. Each spin is restricted to the two states
of the ground doublet, with physical S_z = m_eff * s. Energies in kelvin,
c/R per site.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numba
import numpy as np

N_BLOCKS = 32


def _fcc12():
    return tuple(o for o in itertools.product((-1, 0, 1), repeat=3) if sum(map(abs, o)) == 2)


def _bipartite12():
    axes = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    out = []
    for step in (1, 3):
        for a in axes:
            o = tuple(step * x for x in a)
            out += [o, tuple(-x for x in o)]
    return tuple(out)


#: Named adjacency presets. 'fcc12' uses the 12 (+-1, +-1, 0)-type offsets
#: (each parity class of the cubic grid is an fcc lattice; frustrated for
#: J < 0). 'bipartite12' uses the 6 first and 6 third axial neighbours,
#: which all connect opposite parity classes (unfrustrated for even L).
PRESETS = {
    "fcc12": _fcc12(),
    "bipartite12": _bipartite12(),
    "cubic6": _bipartite12()[:6],
    "square4": ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)),
    "chain2": ((1, 0, 0), (-1, 0, 0)),
}


@dataclass
class IsingLattice:
    shape: tuple
    offsets: tuple
    J: float
    m_eff: float = 1.5
    spins: np.ndarray = None

    def __post_init__(self):
        self.shape = tuple(int(x) for x in self.shape)
        if len(self.shape) != 3 or min(self.shape) < 1:
            raise ValueError(f"shape must be three positive sizes, got {self.shape}")
        offs = tuple(tuple(int(x) for x in o) for o in self.offsets)
        wrap = lambda o: tuple(x % L for x, L in zip(o, self.shape))
        keys = {wrap(o) for o in offs}
        for o in offs:
            # closure is checked modulo the periodic box, so +1 == -1 when L = 2
            if wrap(tuple(-x for x in o)) not in keys:
                raise ValueError(f"offset list is not closed under negation (missing -{o})")
            if all(x % L == 0 for x, L in zip(o, self.shape)):
                raise ValueError(f"offset {o} maps a site onto itself")
        self.offsets = offs
        if self.spins is None:
            self.spins = np.ones(self.n_sites)
        else:
            self.spins = np.asarray(self.spins, dtype=float).ravel().copy()
            if self.spins.size != self.n_sites or not np.all(np.abs(self.spins) == 1):
                raise ValueError("spins must be n_sites values of +-1")

    @classmethod
    def preset(cls, name, L, J, m_eff=1.5):
        shape = (L, L, 1) if name == "square4" else (L, 1, 1) if name == "chain2" else (L, L, L)
        return cls(shape, PRESETS[name], J, m_eff)

    @property
    def n_sites(self):
        return int(np.prod(self.shape))

    @property
    def Z(self):
        return len(self.offsets)

    @property
    def coupling(self):
        """Effective Ising coupling J m_eff^2 (kelvin)."""
        return self.J * self.m_eff**2

    def neighbor_table(self):
        idx = np.arange(self.n_sites).reshape(self.shape)
        cols = [np.roll(idx, shift=tuple(-x for x in o), axis=(0, 1, 2)).ravel() for o in self.offsets]
        return np.column_stack(cols).astype(np.int64)

    def parity(self):
        """+-1 sublattice sign (-1)^(x+y+z) for the staggered magnetization."""
        x, y, z = np.indices(self.shape)
        return np.where((x + y + z) % 2 == 0, 1.0, -1.0).ravel()

    def randomize(self, seed=None):
        rng = np.random.default_rng(seed)
        self.spins = rng.choice(np.array([-1.0, 1.0]), self.n_sites)
        return self


@numba.njit(cache=True)
def _energy(s, nbr, K):
    e = 0.0
    for i in range(s.size):
        h = 0.0
        for k in range(nbr.shape[1]):
            h += s[nbr[i, k]]
        e -= 0.5 * K * s[i] * h
    return e


@numba.njit(cache=True)
def _seed(seed):
    np.random.seed(seed)


@numba.njit(cache=True)
def _sweeps(s, nbr, par, K, T, n_sweeps, check_every, record):
    N = s.size
    Z = nbr.shape[1]
    e = _energy(s, nbr, K)
    m = 0.0
    ms = 0.0
    for i in range(N):
        m += s[i]
        ms += s[i] * par[i]
    out_e = np.empty(n_sweeps)
    out_m = np.empty(n_sweeps)
    out_ms = np.empty(n_sweeps)
    drift = 0.0
    for t in range(n_sweeps):
        for _ in range(N):
            i = np.random.randint(N)
            h = 0.0
            for k in range(Z):
                h += s[nbr[i, k]]
            de = 2.0 * K * s[i] * h
            if de <= 0.0 or np.random.random() < np.exp(-de / T):
                m -= 2.0 * s[i]
                ms -= 2.0 * s[i] * par[i]
                s[i] = -s[i]
                e += de
        if record:
            out_e[t] = e
            out_m[t] = m
            out_ms[t] = ms
        if check_every > 0 and (t + 1) % check_every == 0:
            fresh = _energy(s, nbr, K)
            drift = max(drift, abs(fresh - e))
            e = fresh
    return out_e, out_m, out_ms, drift


@numba.njit(cache=True)
def _single_flip_trace(s, nbr, K, T, n_steps):
    # state code after every proposal (bit k set when spin k is up)
    N = s.size
    Z = nbr.shape[1]
    codes = np.empty(n_steps, dtype=np.int64)
    for t in range(n_steps):
        i = np.random.randint(N)
        h = 0.0
        for k in range(Z):
            h += s[nbr[i, k]]
        de = 2.0 * K * s[i] * h
        if de <= 0.0 or np.random.random() < np.exp(-de / T):
            s[i] = -s[i]
        c = 0
        for k in range(N):
            if s[k] > 0:
                c += 1 << k
        codes[t] = c
    return codes


def mc_energy(lattice: IsingLattice) -> float:
    """Total energy (kelvin) of the current configuration."""
    return float(_energy(lattice.spins, lattice.neighbor_table(), lattice.coupling))


def _blocked_c(e, T, N, n_blocks=N_BLOCKS):
    blocks = np.array_split(e, n_blocks)
    cb = np.array([b.var() for b in blocks]) / (N * T**2)
    return cb.std(ddof=1) / np.sqrt(n_blocks)


@dataclass
class McResult:
    T: np.ndarray
    E: np.ndarray
    c: np.ndarray
    err_c: np.ndarray
    m_stag: np.ndarray
    m_uniform: np.ndarray
    binder: np.ndarray
    sweeps: int
    burn_in: int
    seed: int
    shape: tuple = ()
    energy_drift: float = 0.0
    meta: dict = field(default_factory=dict)

    def columns(self):
        return {"T": self.T, "E": self.E, "c": self.c, "err_c": self.err_c, "m_stag": self.m_stag, "binder": self.binder}


def metropolis_run(lattice: IsingLattice, T_grid, sweeps=20000, burn_in=5000, seed=0, init="random", check_every=1000):
    """Single-flip Metropolis, annealed from the highest to the lowest temperature.

    `sweeps` counts all sweeps per temperature including the `burn_in` ones
    discarded before measuring. Results are returned in ascending T.
    """
    if not sweeps > burn_in >= 0:
        raise ValueError("need sweeps > burn_in >= 0")
    T_grid = np.asarray(T_grid, dtype=float)
    if np.any(T_grid <= 0):
        raise ValueError("temperatures must be positive")
    nbr = lattice.neighbor_table()
    par = lattice.parity()
    K = lattice.coupling
    N = lattice.n_sites
    if init == "random":
        lattice.randomize(seed)
    seeds = np.random.SeedSequence(seed).generate_state(len(T_grid))
    order = np.argsort(T_grid)[::-1]
    n_meas = sweeps - burn_in
    rows = {}
    drift = 0.0
    for k, idx in enumerate(order):
        T = T_grid[idx]
        _seed(int(seeds[k]) & 0x7FFFFFFF)
        s = lattice.spins
        if burn_in:
            _, _, _, d0 = _sweeps(s, nbr, par, K, T, burn_in, check_every, False)
            drift = max(drift, d0)
        e, m, ms, d1 = _sweeps(s, nbr, par, K, T, n_meas, check_every, True)
        drift = max(drift, d1)
        order_param = ms if K < 0 else m
        q = (order_param / N) ** 2
        binder = 1.0 - np.mean(q**2) / (3.0 * np.mean(q) ** 2) if np.mean(q) > 0 else 0.0
        rows[idx] = (
            e.mean() / N,
            e.var() / (N * T**2),
            _blocked_c(e, T, N),
            np.mean(np.abs(ms)) / N,
            np.mean(np.abs(m)) / N,
            binder,
        )
    cols = np.array([rows[i] for i in range(len(T_grid))])
    asc = np.argsort(T_grid)
    cols = cols[asc]
    return McResult(
        T_grid[asc], cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3], cols[:, 4], cols[:, 5],
        sweeps, burn_in, seed, lattice.shape, drift,
    )


def single_flip_trace(lattice: IsingLattice, T, n_steps, seed=0):
    """Configuration code after each of `n_steps` single-flip proposals.

    Bit k of the code is set when spin k is up; intended for small systems.
    """
    if lattice.n_sites > 20:
        raise ValueError("trace is meant for a handful of spins")
    _seed(int(seed))
    return _single_flip_trace(lattice.spins, lattice.neighbor_table(), lattice.coupling, float(T), int(n_steps))


@dataclass
class TnEstimate:
    tn_peak: float
    err_peak: float
    tn_binder: float = float("nan")
    err_binder: float = float("nan")
    inconclusive: bool = False


def _peak_quadratic(T, c, width=2):
    k = int(np.argmax(c))
    if k == 0 or k == len(c) - 1:
        return float(T[k]), float(np.diff(T).max()), True
    lo, hi = max(k - width, 0), min(k + width + 1, len(c))
    a, b, _ = np.polyfit(T[lo:hi], c[lo:hi], 2)
    spacing = 0.5 * (T[min(k + 1, len(T) - 1)] - T[max(k - 1, 0)])
    if a >= 0:
        return float(T[k]), float(spacing), False
    tp = -b / (2 * a)
    if not T[lo] <= tp <= T[hi - 1]:
        tp = T[k]
    return float(tp), float(spacing / 2), False


def _binder_crossing(r1, r2):
    T = np.union1d(r1.T, r2.T)
    T = T[(T >= max(r1.T.min(), r2.T.min())) & (T <= min(r1.T.max(), r2.T.max()))]
    d = np.interp(T, r1.T, r1.binder) - np.interp(T, r2.T, r2.binder)
    exact = np.flatnonzero(d == 0)
    if exact.size:
        k = exact[0]
        return float(T[k]), float(0.5 * np.diff(T).max())
    sign = np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)
    if sign.size == 0:
        return float("nan"), float("nan")
    k = sign[0]
    t = T[k] - d[k] * (T[k + 1] - T[k]) / (d[k + 1] - d[k])
    return float(t), float(0.5 * (T[k + 1] - T[k]))


def estimate_tn(result, width=2):
    """Ordering temperature from the specific-heat peak (and Binder crossing).

    `result` is an McResult, a (T, c) pair, or a list of McResults from
    different lattice sizes (the largest-size peak is reported, plus the
    Binder crossing of the two largest).
    """
    if isinstance(result, (list, tuple)) and result and isinstance(result[0], McResult):
        runs = sorted(result, key=lambda r: np.prod(r.shape))
        est = estimate_tn(runs[-1], width)
        if len(runs) >= 2:
            est.tn_binder, est.err_binder = _binder_crossing(runs[-2], runs[-1])
        return est
    if isinstance(result, McResult):
        T, c = result.T, result.c
    else:
        T, c = (np.asarray(a, dtype=float) for a in result)
    tp, err, edge = _peak_quadratic(T, c, width)
    return TnEstimate(tp, err, inconclusive=edge)
