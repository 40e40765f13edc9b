"""Orientation ensembles: powders, textured powders, crystal sites, sweeps.

A molecular orientation is a proper rotation R whose columns are the
molecular x, y, z axes expressed in the lab (or crystal) frame. A lab field
h is seen by the molecule as R.T @ h; the g-tensor stays diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .spincore import SpinSystem
from .thermo import (
    DomainError,
    ThermoCurve,
    gap_from_t0,
    heat_capacity,
    projected_moments,
    temperature_grid,
)
from .units import CHI_MOLAR_PER_MUB_T
from . import spincore

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))
DEFAULT_POWDER_POINTS = 350


@dataclass(frozen=True)
class SingleAngle:
    """Molecular z axis at polar angle theta (azimuth phi) from the lab field, radians."""

    theta: float = 0.0
    phi: float = 0.0


@dataclass(frozen=True)
class Cone:
    """Easy axes spread uniformly in solid angle within `aperture` (radians) of the field."""

    aperture: float
    n_points: int = DEFAULT_POWDER_POINTS


@dataclass(frozen=True)
class RandomPowder:
    n_points: int = DEFAULT_POWDER_POINTS


@dataclass(frozen=True)
class CrystalSites:
    """Explicit site frames (list of 3x3 rotations) in the crystal frame."""

    frames: tuple

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(np.asarray(f, dtype=float) for f in self.frames))


@dataclass(frozen=True)
class RotationSweep:
    """Sample rotated about `axis` by each angle in `angles` (degrees)."""

    axis: tuple
    angles: tuple


@dataclass(frozen=True)
class SymmetryOp:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3) or np.max(np.abs(m.T @ m - np.eye(3))) > 1e-12:
            raise ValueError(f"symmetry operation {self.label!r} is not orthogonal")
        object.__setattr__(self, "matrix", m)

    @property
    def det(self):
        return float(np.round(np.linalg.det(self.matrix)))


# point parts of the P2_1/n operations, coordinates along a, b, a x b
P21N_OPS = (
    SymmetryOp(np.eye(3), "identity"),
    SymmetryOp(-np.eye(3), "inversion"),
    SymmetryOp(np.diag([-1.0, 1.0, -1.0]), "C2_b"),
    SymmetryOp(np.diag([1.0, -1.0, 1.0]), "mirror_ac"),
)


def rotation_to(theta, phi=0.0):
    """Rotation R with R.T @ z_hat = (sin t cos p, sin t sin p, cos t)."""
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    rz = np.array([[cp, -sp, 0], [sp, cp, 0], [0, 0, 1]])
    ry = np.array([[ct, 0, st], [0, 1, 0], [-st, 0, ct]])
    return (rz @ ry).T


def axis_rotation(axis, angle):
    """Rotation by `angle` (radians) about `axis` (Rodrigues)."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def fibonacci_directions(n, zmin=-1.0):
    """Quasi-uniform unit vectors with z in [zmin, 1] (Fibonacci spiral)."""
    if n < 1:
        raise ValueError("need at least one point")
    k = np.arange(n)
    z = 1.0 - (1.0 - zmin) * (k + 0.5) / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = k * GOLDEN_ANGLE
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _frames_from_directions(d):
    theta = np.arccos(np.clip(d[:, 2], -1, 1))
    phi = np.arctan2(d[:, 1], d[:, 0])
    return [rotation_to(t, p) for t, p in zip(theta, phi)]


def generate_orientations(scheme):
    """List of (rotation, weight) pairs for an orientation scheme."""
    if isinstance(scheme, SingleAngle):
        return [(rotation_to(scheme.theta, scheme.phi), 1.0)]
    if isinstance(scheme, Cone):
        if not 0.0 <= scheme.aperture <= np.pi / 2 + 1e-12:
            raise DomainError("cone aperture must lie in [0, pi/2]")
        if scheme.aperture == 0.0:
            return [(np.eye(3), 1.0)]
        d = fibonacci_directions(scheme.n_points, zmin=np.cos(scheme.aperture))
        w = 1.0 / len(d)
        return [(R, w) for R in _frames_from_directions(d)]
    if isinstance(scheme, RandomPowder):
        d = fibonacci_directions(scheme.n_points)
        w = 1.0 / len(d)
        return [(R, w) for R in _frames_from_directions(d)]
    if isinstance(scheme, CrystalSites):
        w = 1.0 / len(scheme.frames)
        return [(R, w) for R in scheme.frames]
    if isinstance(scheme, RotationSweep):
        w = 1.0 / len(scheme.angles)
        return [(axis_rotation(scheme.axis, np.radians(a)), w) for a in scheme.angles]
    raise TypeError(f"unknown orientation scheme {scheme!r}")


def crystal_site_frames(easy_axis_polar, ops=P21N_OPS):
    """Molecular frames of the symmetry-related sites, crystal frame (a, b, a x b).

    The reference site has its easy axis z in the ac plane at `easy_axis_polar`
    degrees from the ab-plane normal and its y axis along b. Improper
    operations are followed by a global sign flip to keep frames right-handed;
    a global flip only reverses the field and leaves the spectrum unchanged.
    """
    a = np.radians(easy_axis_polar)
    z = np.array([np.sin(a), 0.0, np.cos(a)])
    y = np.array([0.0, 1.0, 0.0])
    R0 = np.column_stack([np.cross(y, z), y, z])
    frames = []
    for op in ops:
        if not isinstance(op, SymmetryOp):
            op = SymmetryOp(op)
        frames.append(op.det * op.matrix @ R0)
    return frames


def _lab_field(H_lab):
    h = np.asarray(H_lab, dtype=float)
    if h.ndim == 0:
        return np.array([0.0, 0.0, float(h)])
    return h.reshape(3)


def molecular_fields(orientations, H_lab):
    """Field seen in each molecular frame, shape (n_orient, 3)."""
    h = _lab_field(H_lab)
    return np.array([R.T @ h for R, _ in orientations])


def _weights(orientations):
    w = np.array([wt for _, wt in orientations])
    if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
        raise ValueError("orientation weights must be non-negative and sum to 1")
    return w


def averaged_specific_heat(sys: SpinSystem, orientations, T, H_lab):
    """Orientation-weighted c/R at temperatures T for one lab field."""
    w = _weights(orientations)
    fields = molecular_fields(orientations, H_lab)
    E = spincore.spectra(sys, fields)
    return w @ heat_capacity(E, T)


def averaged_magnetization(sys: SpinSystem, orientations, H_values, T, direction=None):
    """Orientation-averaged moment along the lab field for each field magnitude."""
    w = _weights(orientations)
    n = np.array([0.0, 0.0, 1.0]) if direction is None else np.asarray(direction, float)
    n = n / np.linalg.norm(n)
    H_values = np.atleast_1d(np.asarray(H_values, dtype=float))
    dirs = np.array([R.T @ n for R, _ in orientations])
    fields = (H_values[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    all_dirs = np.broadcast_to(dirs, (len(H_values),) + dirs.shape).reshape(-1, 3)
    m = projected_moments(sys, fields, T, directions=all_dirs)
    m = m.reshape(len(H_values), len(dirs), -1)
    return np.einsum("k,hkt->ht", w, m)


def averaged_susceptibility(sys: SpinSystem, orientations, T, H, direction=None):
    """Orientation-averaged isothermal chi (cm^3/mol) at field magnitude H."""
    step = 1e-4 * abs(H) if H != 0 else 1e-5
    m = averaged_magnetization(sys, orientations, [H - step, H + step], T, direction)
    return CHI_MOLAR_PER_MUB_T * (m[1] - m[0]) / (2 * step)


def scheme_label(scheme):
    return type(scheme).__name__


def averaged_observable(sys: SpinSystem, scheme, observable, grid, H_lab=0.0, T=None, tip=0.0) -> ThermoCurve:
    """Orientation-averaged observable.

    observable:
      'specific_heat'  c/R vs temperature `grid` at lab field `H_lab`
      'magnetization'  M (mu_B) vs field-magnitude `grid` at temperature `T`
      'chi'            chi (cm^3/mol) vs temperature `grid` at field `H_lab`
      'chiT'           chi*T including `tip`

    `H_lab` is a magnitude along lab z, or a 3-vector in the lab/crystal
    frame. Specific heats are averaged before any peak is located.
    """
    orient = generate_orientations(scheme) if not isinstance(scheme, list) else scheme
    label = scheme_label(scheme)
    h = _lab_field(H_lab)
    Hmag = float(np.linalg.norm(h))
    direction = h / Hmag if Hmag > 0 else np.array([0.0, 0.0, 1.0])
    if observable == "specific_heat":
        Tg = temperature_grid(grid)
        return ThermoCurve(Tg, averaged_specific_heat(sys, orient, Tg, h), observable, Hmag, label)
    if observable == "magnetization":
        if T is None:
            raise ValueError("magnetization needs a temperature T")
        Hs = np.asarray(grid, dtype=float)
        m = averaged_magnetization(sys, orient, Hs, T, direction)[:, 0]
        return ThermoCurve(Hs, m, observable, Hmag, label, {"T": T})
    if observable in ("chi", "chiT"):
        Tg = temperature_grid(grid)
        chi = averaged_susceptibility(sys, orient, Tg, Hmag, direction) + tip
        vals = chi * Tg if observable == "chiT" else chi
        return ThermoCurve(Tg, vals, observable, Hmag, label, {"tip": tip})
    raise ValueError(f"unsupported observable {observable!r}")


def effective_gap(curve: ThermoCurve):
    """Effective two-level gap (K) from the peak of an (averaged) c/R curve."""
    return gap_from_t0(curve.peak())


def rotation_sweep(sys: SpinSystem, frames, axis, start, angles, H, T):
    """Site-averaged magnetization as the field turns about `axis`.

    The field direction at angle 0 is `start`; angles in degrees.
    """
    start = np.asarray(start, dtype=float)
    start = start / np.linalg.norm(start)
    orient = [(R, 1.0 / len(frames)) for R in frames]
    out = []
    for a in np.asarray(angles, dtype=float):
        n = axis_rotation(axis, np.radians(a)) @ start
        out.append(averaged_magnetization(sys, orient, [H], T, n)[0, 0])
    return ThermoCurve(np.asarray(angles, float), np.array(out), "magnetization", H, "RotationSweep", {"T": T})
