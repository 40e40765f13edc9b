"""JSON and CSV readers and writers.

CSV files are comma separated with '.' decimals, '#'-prefixed metadata
lines, UTF-8 and LF line endings. Every writer goes through a temporary
file in the target directory followed by a rename, so a failed run never
leaves a half-written file behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .orientation import Cone, CrystalSites, RandomPowder, SingleAngle, crystal_site_frames
from .spincore import Hyperfine, SpinSystem
from .units import UnitError, to_kelvin


class ConfigError(ValueError):
    """Malformed configuration or data file. `line` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        self.path, self.line = path, line
        where = f"{path}:{line}: " if path is not None and line is not None else f"{path}: " if path else ""
        super().__init__(where + message)


def atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x) -> str:
    return f"{float(x):.9g}"


def load_json(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read file ({exc.strerror})", path) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, path, exc.lineno) from None


def _check_keys(obj, allowed, what, path=None):
    if not isinstance(obj, dict):
        raise ConfigError(f"{what} must be a JSON object", path)
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {what}: {sorted(unknown)}", path)


def _quantity(v, default_unit, what, path=None):
    if isinstance(v, (int, float)):
        return to_kelvin(float(v), default_unit)
    _check_keys(v, {"value", "unit"}, what, path)
    try:
        return to_kelvin(float(v["value"]), v.get("unit", default_unit))
    except (KeyError, TypeError, UnitError) as exc:
        raise ConfigError(f"bad {what}: {exc}", path) from None


# --- spin systems ----------------------------------------------------------


def spin_system_from_dict(d, path=None) -> SpinSystem:
    """Bare numbers for D, E and A are read as cm^-1, cm^-1 and kelvin."""
    _check_keys(d, {"S", "D", "E", "g", "hyperfine"}, "spin system", path)
    if "S" not in d:
        raise ConfigError("spin system needs 'S'", path)
    hf = None
    if d.get("hyperfine") is not None:
        h = d["hyperfine"]
        _check_keys(h, {"A", "I"}, "hyperfine", path)
        hf = Hyperfine(_quantity(h["A"], "K", "hyperfine A", path), float(h["I"]))
    g = d.get("g", 2.0)
    g = float(g) if isinstance(g, (int, float)) else tuple(float(x) for x in g)
    try:
        return SpinSystem(float(d["S"]), _quantity(d.get("D", 0.0), "cm-1", "D", path),
                          _quantity(d.get("E", 0.0), "cm-1", "E", path), g, hf)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from None


def spin_system_to_dict(sys: SpinSystem) -> dict:
    from .units import from_kelvin

    out = {
        "S": sys.S,
        "D": {"value": from_kelvin(sys.D, "cm-1"), "unit": "cm-1"},
        "E": {"value": from_kelvin(sys.E, "cm-1"), "unit": "cm-1"},
        "g": list(sys.g),
    }
    if sys.hyperfine is not None:
        out["hyperfine"] = {"A": {"value": sys.hyperfine.A, "unit": "K"}, "I": sys.hyperfine.I}
    return out


def load_spin_system(path) -> SpinSystem:
    return spin_system_from_dict(load_json(path), path)


# --- orientation schemes ---------------------------------------------------


def scheme_from_dict(d, path=None):
    """{"scheme": "single"|"cone"|"powder"|"crystal", ...} with angles in degrees."""
    if not isinstance(d, dict) or "scheme" not in d:
        raise ConfigError("orientation needs a 'scheme' key", path)
    kind = d["scheme"]
    if kind == "single":
        _check_keys(d, {"scheme", "theta_deg", "phi_deg"}, "single-angle scheme", path)
        return SingleAngle(np.radians(d.get("theta_deg", 0.0)), np.radians(d.get("phi_deg", 0.0)))
    if kind == "cone":
        _check_keys(d, {"scheme", "aperture_deg", "n"}, "cone scheme", path)
        return Cone(np.radians(d.get("aperture_deg", 0.0)), int(d.get("n", 350)))
    if kind == "powder":
        _check_keys(d, {"scheme", "n"}, "powder scheme", path)
        return RandomPowder(int(d.get("n", 350)))
    if kind == "crystal":
        _check_keys(d, {"scheme", "axis_deg"}, "crystal scheme", path)
        return CrystalSites(crystal_site_frames(float(d.get("axis_deg", 0.0))))
    raise ConfigError(f"unknown orientation scheme {kind!r}", path)


# --- CSV -------------------------------------------------------------------


def write_csv(path, columns: dict, meta: list = ()):
    """Header-named columns, 9 significant digits, optional '#' metadata lines."""
    names = list(columns)
    arrs = [np.atleast_1d(np.asarray(columns[n], dtype=float)) for n in names]
    lines = [f"# {m}" for m in meta] + [",".join(names)]
    lines += [",".join(fmt(a[i]) for a in arrs) for i in range(arrs[0].size)]
    atomic_write(path, "\n".join(lines) + "\n")


def write_curve(path, curve):
    """ThermoCurve as '# observable,field_T,scheme' header then x,value rows."""
    head = f"# {curve.observable},{fmt(curve.field)},{curve.scheme}"
    rows = [f"{fmt(x)},{fmt(v)}" for x, v in zip(curve.x, curve.values)]
    atomic_write(path, "\n".join([head, "x,value"] + rows) + "\n")


def read_table(path, required, optional=()):
    """Read a headed numeric CSV; returns {column: array} (missing optional ones omitted)."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read file ({exc.strerror})", path) from None
    header, rows = None, []
    for lineno, raw in enumerate(lines, 1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        cells = [c.strip() for c in s.split(",")]
        if header is None:
            header = cells
            unknown = set(header) - set(required) - set(optional)
            missing = set(required) - set(header)
            if missing or unknown:
                raise ConfigError(f"columns must include {list(required)} (optional {list(optional)}); "
                                  f"missing {sorted(missing)}, unknown {sorted(unknown)}", path, lineno)
            continue
        if len(cells) != len(header):
            raise ConfigError(f"expected {len(header)} fields, found {len(cells)}", path, lineno)
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise ConfigError(f"non-numeric value in {s!r}", path, lineno) from None
    if header is None or not rows:
        raise ConfigError("no data rows", path)
    data = np.array(rows)
    return {name: data[:, k] for k, name in enumerate(header)}


def read_ac(path):
    """ac susceptibility table: f_Hz, chi_re, chi_im[, sigma]."""
    return read_table(path, ("f_Hz", "chi_re", "chi_im"), ("sigma",))


def read_t1(path):
    return read_table(path, ("T_K", "T1_s"), ("sigma",))


def write_mc_result(path, result):
    meta = [f"shape={'x'.join(map(str, result.shape))}", f"sweeps={result.sweeps}",
            f"burn_in={result.burn_in}", f"seed={result.seed}"]
    write_csv(path, result.columns(), meta)
