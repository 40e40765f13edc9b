"""Command-line front end: ``spinclock <command> [options]``.

Every command writes its output files below ``--outdir``. Exit status is
0 on success, 2 for configuration or data-file problems and 3 when a
numerical step fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import cluster, fitting, latticemc, orientation, presets, relaxation, spincore, thermo
from . import io as sio
from .units import KELVIN_PER_CM, from_kelvin

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class NumericalFailure(RuntimeError):
    pass


# --- helpers ---------------------------------------------------------------


def _system(args):
    if args.model:
        return sio.load_spin_system(args.model)
    if args.preset == "custom":
        raise sio.ConfigError("--preset custom needs --model FILE")
    return presets.get(args.preset).system


def _preset(args):
    return presets.get(args.preset) if args.preset != "custom" else None


def _out(args, name):
    return os.path.join(args.outdir, name)


def _tgrid(args):
    if not 0 < args.tmin < args.tmax:
        raise sio.ConfigError("need 0 < --tmin < --tmax")
    return thermo.log_grid(args.tmin, args.tmax, args.nt)


def _scheme(args, default=None):
    if getattr(args, "orientation", None):
        return sio.scheme_from_dict(sio.load_json(args.orientation), args.orientation)
    if getattr(args, "theta", None) is not None:
        return orientation.SingleAngle(np.radians(args.theta))
    return default if default is not None else orientation.SingleAngle(0.0)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise sio.ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _print_json(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


# --- commands --------------------------------------------------------------


def cmd_levels(args):
    sysm = _system(args)
    field = spincore.FieldVector.along(args.field, np.radians(args.theta or 0.0)).vector
    lv = spincore.levels(sysm, field, vectors=False)
    groups = lv.groups()
    E = lv.energies
    sio.write_csv(_out(args, "levels.csv"), {"index": np.arange(len(E)), "energy_K": E,
                                              "energy_cm": from_kelvin(E, "cm-1")},
                  [f"field_T={sio.fmt(args.field)}", f"theta_deg={sio.fmt(args.theta or 0.0)}"])
    print(f"{len(E)} levels at |H| = {args.field:g} T")
    for g in groups:
        e = E[g[0]]
        print(f"  {e:14.6f} K  {from_kelvin(e, 'cm-1'):12.5f} cm-1  degeneracy {len(g)}")
    if len(groups) > 1:
        gap = E[groups[1][0]]
        print(f"first gap: {gap:.6f} K = {from_kelvin(gap, 'cm-1'):.4f} cm-1 = {from_kelvin(gap, 'GHz'):.4f} GHz")
    return EXIT_OK


def cmd_heatcap(args):
    sysm = _system(args)
    curve = orientation.averaged_observable(sysm, _scheme(args), "specific_heat", _tgrid(args), args.field)
    sio.write_curve(_out(args, "heatcap.csv"), curve)
    print(f"c/R maximum at T0 = {curve.peak():.4f} K")
    return EXIT_OK


def cmd_magnetize(args):
    sysm = _system(args)
    H = np.linspace(args.hmin, args.hmax, args.nh)
    scheme = _scheme(args, orientation.RandomPowder())
    for T in _floats(args.temps):
        curve = orientation.averaged_observable(sysm, scheme, "magnetization", H, T=T)
        sio.write_curve(_out(args, f"magnetization_T{T:g}K.csv"), curve)
    return EXIT_OK


def cmd_suscept(args):
    sysm = _system(args)
    p = _preset(args)
    tip = args.tip if args.tip is not None else (p.tip if p else 0.0)
    scheme = _scheme(args, orientation.RandomPowder())
    curve = orientation.averaged_observable(sysm, scheme, "chiT", _tgrid(args), max(args.field, 1e-6), tip=tip)
    sio.write_curve(_out(args, "chiT.csv"), curve)
    print(f"chiT({curve.x[0]:g} K) = {curve.values[0]:.4f}, chiT({curve.x[-1]:g} K) = {curve.values[-1]:.4f} cm3 K/mol")
    if args.vanvleck:
        T = curve.x
        h = (0.0, 0.0, max(args.field, 1e-6))
        sio.write_csv(_out(args, "chi_components.csv"), {
            "T_K": T,
            "chi_T": thermo.susceptibility_isothermal(sysm, h, T),
            "chi_S": thermo.susceptibility_vanvleck(sysm, h, T),
        }, ["single crystal, field along z"])
    return EXIT_OK


def cmd_powder(args):
    sysm = _system(args)
    T = _tgrid(args)
    rows = {"aperture_deg": [], "T0_K": [], "gap_K": []}
    for a in _floats(args.apertures):
        curve = orientation.averaged_observable(sysm, orientation.Cone(np.radians(a), args.n), "specific_heat", T, args.field)
        sio.write_curve(_out(args, f"powder_cone{a:g}.csv"), curve)
        rows["aperture_deg"].append(a)
        rows["T0_K"].append(curve.peak())
        rows["gap_K"].append(orientation.effective_gap(curve))
    sio.write_csv(_out(args, "powder_summary.csv"), rows, [f"field_T={sio.fmt(args.field)}"])
    return EXIT_OK


def cmd_mc(args):
    J = args.J * KELVIN_PER_CM
    lat = latticemc.IsingLattice.preset(args.lattice, args.L, J, args.m_eff)
    res = latticemc.metropolis_run(lat, np.linspace(args.tmin, args.tmax, args.nt), args.sweeps, args.burn_in, args.seed)
    sio.write_mc_result(_out(args, "mc.csv"), res)
    est = latticemc.estimate_tn(res)
    note = " (at grid edge)" if est.inconclusive else ""
    print(f"c peak at T = {est.tn_peak:.4f} +- {est.err_peak:.4f} K{note}")
    return EXIT_OK


def cmd_cluster(args):
    base = _system(args)
    gap = args.gap
    sysm = base.replace(E=gap * KELVIN_PER_CM / 2) if gap is not None else base
    model = cluster.ClusterModel.star(sysm, args.J, args.n_outer, not args.no_ring, (0.0, 0.0, args.field))
    lv = cluster.cluster_levels(model)
    curve = cluster.cluster_specific_heat(model, _tgrid(args), lv)
    sio.write_curve(_out(args, "cluster_heatcap.csv"), curve)
    n = min(len(lv.energies), 64)
    sio.write_csv(_out(args, "cluster_levels.csv"), {"index": np.arange(n), "energy_K": lv.energies[:n]})
    print(f"dim {model.dim}; ground degeneracy {lv.degeneracies()[0]}; max c/R per site {curve.values.max():.4f} "
          f"at {curve.x[np.argmax(curve.values)]:.4f} K")
    return EXIT_OK


def cmd_relax(args):
    if not args.ac and not args.t1:
        raise sio.ConfigError("relax needs --ac FILE and/or --t1 FILE")
    report = {}
    if args.ac:
        d = sio.read_ac(args.ac)
        fit = relaxation.cole_cole_fit(2 * np.pi * d["f_Hz"], d["chi_re"], d["chi_im"], sigma=d.get("sigma"))
        p = fit.params
        report["cole_cole"] = {"chi_T": p.chi_T, "chi_S": p.chi_S, "tau": p.tau, "beta": p.beta,
                               "stderr": fit.stderr.tolist(), "flags": fit.flags}
    if args.t1:
        d = sio.read_t1(args.t1)
        fit = relaxation.t1_fit(d["T_K"], d["T1_s"], d.get("sigma"))
        report["t1"] = {"A_dir": fit.model.A_dir, "A_raman": fit.model.A_raman,
                        "stderr": np.sqrt(np.diag(fit.covariance)).tolist(), "clipped": fit.clipped}
    sio.atomic_write(_out(args, "relax.json"), json.dumps(report, indent=2, sort_keys=True) + "\n")
    _print_json(report)
    return EXIT_OK


_FIT_KEYS = {"model", "data", "free", "fixed", "n_starts", "seed", "orientation_points", "ftol", "max_evals"}


def cmd_fit(args):
    cfg = sio.load_json(args.problem)
    if not isinstance(cfg, dict):
        raise sio.ConfigError("fit problem must be a JSON object", args.problem)
    unknown = set(cfg) - _FIT_KEYS
    if unknown:
        raise sio.ConfigError(f"unknown key(s) {sorted(unknown)}", args.problem)
    base = os.path.dirname(os.path.abspath(args.problem))
    files = cfg.get("data", [])
    files = [files] if isinstance(files, str) else files
    if not files:
        raise sio.ConfigError("fit problem lists no data files", args.problem)
    data = []
    for f in files:
        t = sio.read_table(os.path.join(base, f), ("T_K", "H_T", "value"), ("sigma", "angle_deg"))
        ctrl = {"T": t["T_K"], "H": t["H_T"]}
        data.append(fitting.Dataset(ctrl, t["value"], t.get("sigma")))
    kind = cfg.get("model")
    seed = cfg.get("seed", args.seed)
    if kind == "zfs_powder":
        fx = cfg.get("fixed", {})
        rep = fitting.fit_zfs_powder_magnetization(data, g=fx.get("g", 2.16), tip=fx.get("tip", 1e-4),
                                                   n_starts=cfg.get("n_starts", 16), seed=seed,
                                                   n_points=cfg.get("orientation_points", 100))
        result = rep.result
        out = result.to_dict()
        out["branches"] = {k: (vars(b) if b else None) for k, b in (("negative", rep.negative), ("positive", rep.positive))}
        out["flags"] = rep.flags
        names_model = None
    else:
        if kind not in fitting.MODELS:
            raise sio.ConfigError(f"unknown model {kind!r}; choose from {sorted(fitting.MODELS) + ['zfs_powder']}", args.problem)
        cls = fitting.MODELS[kind]
        model = cls(cfg["orientation_points"]) if "orientation_points" in cfg else cls()
        try:
            free = {k: tuple(float(x) for x in v) for k, v in cfg["free"].items()}
            problem = fitting.FitProblem(model, free, cfg.get("fixed", {}), cfg.get("n_starts", 16), seed,
                                         cfg.get("ftol", 1e-10), cfg.get("max_evals", 2000))
        except (KeyError, TypeError, ValueError) as exc:
            raise sio.ConfigError(f"bad free-parameter block: {exc}", args.problem) from None
        result = fitting.least_squares(problem, data)
        out = result.to_dict()
        names_model = problem
    if result.status == "failed":
        raise NumericalFailure("every start failed to evaluate the model")
    sio.atomic_write(_out(args, "fit_result.json"), json.dumps(out, indent=2, sort_keys=True, default=float) + "\n")
    if names_model is not None:
        r = fitting._residual_vector(names_model, data, result.x)
        T = np.concatenate([d.controls["T"] for d in data])
        H = np.concatenate([d.controls["H"] for d in data])
        sio.write_csv(_out(args, "fit_residuals.csv"), {"T_K": T, "H_T": H, "residual": r})
    _print_json({"status": out["status"], "params": out["params"], "residual": out["residual"]})
    return EXIT_OK


def cmd_rabi(args):
    if args.bz <= 0:
        raise sio.ConfigError("--bz must be positive")
    f, w = relaxation.rabi_frequency(args.g, args.bz, args.S)
    print(f"Rabi frequency: {f:.3e} Hz ({w:.3e} rad/s); pi-pulse {0.5 / f if f else float('inf'):.3e} s")
    return EXIT_OK


# --- reproduce -------------------------------------------------------------


def _fig2(args):
    p = presets.get("complex1")
    T = thermo.log_grid(0.35, 30.0, 200)
    mag = thermo.specific_heat(spincore.levels(p.system, vectors=False), T)
    deb = thermo.debye_specific_heat(presets.THETA_DEBYE, T)
    sio.write_curve(_out(args, "fig2_magnetic.csv"), mag)
    sio.write_curve(_out(args, "fig2_debye.csv"), deb)
    H = np.linspace(0, 3, 61)
    E = spincore.spectra(p.system, np.column_stack([0 * H, 0 * H, H]))
    sio.write_csv(_out(args, "fig2_levels.csv"), {"H_T": H, **{f"E{k}_cm": from_kelvin(E[:, k], "cm-1") for k in range(3)}},
                  ["complex1 levels, field along z"])
    print(f"fig2: zero-field T0 = {mag.peak():.4f} K")


def _fig3(args):
    p = presets.get("complex1")
    T = thermo.log_grid(0.3, 30.0, 160)
    fields = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0]
    cone = orientation.Cone(np.radians(30.0), 200)
    for h in fields:
        c = orientation.averaged_observable(p.system, cone, "specific_heat", T, h)
        sio.write_curve(_out(args, f"fig3_cone30_H{h:g}T.csv"), c)
    Hs = np.linspace(0, 3, 13)
    rows = {"H_T": Hs, "gap_formula_K": [], "gap_aligned_K": [], "gap_powder_K": []}
    for h in Hs:
        rows["gap_formula_K"].append(float(spincore.zeeman_gap(p.system, h)))
        for key, sch in (("gap_aligned_K", orientation.SingleAngle(0.0)), ("gap_powder_K", orientation.RandomPowder(200))):
            c = orientation.averaged_observable(p.system, sch, "specific_heat", T, h)
            rows[key].append(orientation.effective_gap(c))
    sio.write_csv(_out(args, "fig3_gap.csv"), rows, ["effective gap from c/R maxima, complex1"])


def _fig4(args):
    p = presets.get("complex2")
    T = thermo.log_grid(0.1, 30.0, 160)
    zfs = thermo.specific_heat(spincore.levels(p.system, vectors=False), T)
    sio.write_curve(_out(args, "fig4_zfs.csv"), zfs)
    sio.write_curve(_out(args, "fig4_debye.csv"), thermo.debye_specific_heat(presets.THETA_DEBYE, T))
    sio.write_curve(_out(args, "fig4_hyperfine.csv"),
                    thermo.hyperfine_specific_heat_bound(p.hyperfine_mK * 1e-3, p.S, p.I, T, "doublet"))
    lat = latticemc.IsingLattice.preset("fcc12", 8, presets.J_INTER_CM * KELVIN_PER_CM, presets.M_EFF)
    Tmc = np.linspace(0.1, 1.0, 19)
    res = latticemc.metropolis_run(lat, Tmc, 6000, 2000, args.seed)
    sio.write_mc_result(_out(args, "fig4_mc.csv"), res)
    total = zfs.values[None, :]  # ZFS and interaction contributions are added, not solved jointly
    c_int = np.interp(T, res.T, res.c, left=0.0, right=0.0)
    sio.write_csv(_out(args, "fig4_total.csv"), {"T_K": T, "c_R": total[0] + c_int}, ["ZFS + Ising interaction sum"])


def _fig8(args):
    p = presets.get("complex4")
    T = thermo.log_grid(0.3, 20.0, 160)
    sch = orientation.SingleAngle(np.radians(p.axis_deg))
    for h in (0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.25, 0.5, 1.0, 2.0):
        c = orientation.averaged_observable(p.system, sch, "specific_heat", T, h)
        sio.write_curve(_out(args, f"fig8_H{h:g}T.csv"), c)


def _fig10(args):
    p = presets.get("complex4")
    T = thermo.log_grid(0.1, 20.0, 200)
    Hs = np.linspace(0, 2, 21)
    rows = {"H_T": Hs, "gap_K": [], "gap_GHz": []}
    for h in Hs:
        c = orientation.averaged_observable(p.system, orientation.SingleAngle(np.radians(p.axis_deg)), "specific_heat", T, h)
        g = orientation.effective_gap(c)
        rows["gap_K"].append(g)
        rows["gap_GHz"].append(from_kelvin(g, "GHz"))
    sio.write_csv(_out(args, "fig10_gap.csv"), rows, [f"field at {p.axis_deg:g} deg from the easy axis"])


def _figS6(args):
    p = presets.get("complex1")
    J = presets.J_INTER_CM * KELVIN_PER_CM
    T = thermo.log_grid(0.01, 5.0, 160)
    for label, E in (("gap0", 0.0), ("gap2.9", p.system.E)):
        sysm = p.system.replace(E=E)
        curve = cluster.cluster_specific_heat(cluster.ClusterModel.star(sysm, J), T)
        sio.write_curve(_out(args, f"figS6_{label}_heatcap.csv"), curve)
        Hs = np.linspace(0, 0.5, 6)
        rows = {"H_T": Hs}
        lows = [cluster.cluster_levels(cluster.ClusterModel.star(sysm, J, field=(0, 0, h))).energies[:8] for h in Hs]
        for k in range(8):
            rows[f"E{k}_K"] = [lv[k] for lv in lows]
        sio.write_csv(_out(args, f"figS6_{label}_levels.csv"), rows)


TARGETS = {"fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig8": _fig8, "fig10": _fig10, "figS6": _figS6}


def cmd_reproduce(args):
    TARGETS[args.target](args)
    print(f"{args.target}: outputs written to {args.outdir}")
    return EXIT_OK


# --- parser ----------------------------------------------------------------


def _add_common(p, tmin=0.3, tmax=20.0, nt=200, field=0.0):
    p.add_argument("--preset", default="complex1", choices=sorted(presets.PRESETS) + ["custom"])
    p.add_argument("--model", help="spin-system JSON file (overrides --preset)")
    p.add_argument("--outdir", default=".")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tmin", type=float, default=tmin)
    p.add_argument("--tmax", type=float, default=tmax)
    p.add_argument("--nt", type=int, default=nt)
    p.add_argument("--field", type=float, default=field, help="field magnitude, tesla")
    p.add_argument("--theta", type=float, default=None, help="field angle from molecular z, degrees")
    p.add_argument("--orientation", help="orientation-scheme JSON file")
    return p


def build_parser():
    ap = argparse.ArgumentParser(prog="spinclock", description="Spin-clock simulation and fitting toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, **defaults):
        p = _add_common(sub.add_parser(name), **defaults)
        p.set_defaults(func=func)
        return p

    add("levels", cmd_levels)
    add("heatcap", cmd_heatcap)
    p = add("magnetize", cmd_magnetize)
    p.add_argument("--temps", default="2,4,6")
    p.add_argument("--hmin", type=float, default=0.0)
    p.add_argument("--hmax", type=float, default=5.0)
    p.add_argument("--nh", type=int, default=51)
    p = add("suscept", cmd_suscept, tmin=2.0, tmax=300.0, field=0.1)
    p.add_argument("--tip", type=float, default=None)
    p.add_argument("--vanvleck", action="store_true", help="also write chi_T and chi_S along z")
    p = add("powder", cmd_powder)
    p.add_argument("--apertures", default="0,30,60,90")
    p.add_argument("--n", type=int, default=350)
    p = add("mc", cmd_mc, tmin=0.1, tmax=2.0, nt=20)
    p.add_argument("--lattice", default="bipartite12", choices=sorted(latticemc.PRESETS))
    p.add_argument("--L", type=int, default=10)
    p.add_argument("--J", type=float, default=presets.J_INTER_CM, help="coupling, cm^-1")
    p.add_argument("--m-eff", type=float, default=presets.M_EFF)
    p.add_argument("--sweeps", type=int, default=20000)
    p.add_argument("--burn-in", type=int, default=5000)
    p = add("cluster", cmd_cluster, tmin=0.01, tmax=5.0)
    p.add_argument("--gap", type=float, default=None, help="tunnel gap 2|E|, cm^-1")
    p.add_argument("--J", type=float, default=presets.J_INTER_CM * KELVIN_PER_CM, help="coupling, kelvin")
    p.add_argument("--n-outer", type=int, default=6)
    p.add_argument("--no-ring", action="store_true")
    p = add("relax", cmd_relax)
    p.add_argument("--ac")
    p.add_argument("--t1")
    p = add("fit", cmd_fit)
    p.add_argument("problem", help="fit-problem JSON file")
    p = add("rabi", cmd_rabi)
    p.add_argument("--g", type=float, default=2.0)
    p.add_argument("--bz", type=float, default=1e-3, help="drive amplitude, tesla")
    p.add_argument("--S", type=float, default=1.0)
    p = add("reproduce", cmd_reproduce)
    p.add_argument("target", choices=sorted(TARGETS))
    return ap


def _cap_threads():
    n = os.environ.get("SPINCLOCK_THREADS")
    if not n:
        return
    try:
        n = max(int(n), 1)
    except ValueError:
        raise sio.ConfigError(f"SPINCLOCK_THREADS must be an integer, got {n!r}") from None
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _cap_threads()
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except sio.ConfigError as exc:
        print(f"spinclock: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KeyError, spincore.InvalidSpinError, thermo.DomainError, cluster.ClusterTooLargeError) as exc:
        print(f"spinclock: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, ArithmeticError, np.linalg.LinAlgError, spincore.ContractViolation) as exc:
        print(f"spinclock: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"spinclock: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
