import json
import re
import subprocess
import sys

import numpy as np
import pytest

from spinclock import cli, fitting
from spinclock.relaxation import ColeColeParams, T1Model, cole_cole_eval, t1_eval


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_heatcap_complex1(capsys, tmp_path):
    code, out, _ = run(capsys, "heatcap", "--preset", "complex1", "--outdir", str(tmp_path))
    assert code == 0
    t0 = float(re.search(r"T0 = ([\d.]+)", out).group(1))
    assert t0 == pytest.approx(1.74, abs=0.02)
    lines = (tmp_path / "heatcap.csv").read_text().splitlines()
    assert lines[0].startswith("# specific_heat,0,")
    assert lines[1] == "x,value"


def test_levels_complex2(capsys, tmp_path):
    code, out, _ = run(capsys, "levels", "--preset", "complex2", "--outdir", str(tmp_path))
    assert code == 0
    assert "degeneracy 2" in out
    assert "16.6200 cm-1" in out


def test_rabi(capsys):
    code, out, _ = run(capsys, "rabi", "--g", "2", "--bz", "1e-3", "--S", "1")
    assert code == 0
    assert "5.598e+07 Hz" in out


def test_custom_model(capsys, tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"S": 1, "D": -2.71, "E": 0.105, "g": 2.16}))
    code, out, _ = run(capsys, "levels", "--model", str(m), "--outdir", str(tmp_path))
    assert code == 0 and "3 levels" in out


def test_bad_json_exit_2(capsys, tmp_path):
    m = tmp_path / "bad.json"
    m.write_text('{"S": 1,\n "D" -2}')
    code, _, err = run(capsys, "levels", "--model", str(m))
    assert code == 2
    assert "bad.json:2:" in err


def test_unknown_key_exit_2(capsys, tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"S": 1, "Dee": -2}))
    assert run(capsys, "levels", "--model", str(m))[0] == 2


def test_bad_csv_exit_2(capsys, tmp_path):
    t = tmp_path / "t1.csv"
    t.write_text("T_K,T1_s\n2,1e-4\n3,abc\n")
    code, _, err = run(capsys, "relax", "--t1", str(t), "--outdir", str(tmp_path))
    assert code == 2 and "t1.csv:3:" in err


def test_invalid_spin_exit_2(capsys, tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"S": 1.25}))
    assert run(capsys, "levels", "--model", str(m))[0] == 2


def test_mc_is_reproducible(capsys, tmp_path):
    args = ["mc", "--L", "4", "--sweeps", "400", "--burn-in", "100", "--nt", "5", "--tmin", "0.1", "--tmax", "1", "--seed", "3"]
    for d in ("a", "b"):
        assert run(capsys, *args, "--outdir", str(tmp_path / d))[0] == 0
    assert (tmp_path / "a" / "mc.csv").read_bytes() == (tmp_path / "b" / "mc.csv").read_bytes()


def test_relax_from_files(capsys, tmp_path):
    w = np.geomspace(10, 1e5, 30)
    re_, im_ = cole_cole_eval(ColeColeParams(1.0, 0.1, 1e-3, 0.9), w)
    ac = tmp_path / "ac.csv"
    ac.write_text("f_Hz,chi_re,chi_im\n" + "".join(f"{a / (2 * np.pi):.17g},{b:.17g},{c:.17g}\n" for a, b, c in zip(w, re_, im_)))
    T = np.linspace(2, 10, 9)
    t1 = tmp_path / "t1.csv"
    t1.write_text("T_K,T1_s\n" + "".join(f"{a:.17g},{b:.17g}\n" for a, b in zip(T, t1_eval(T1Model(50.0, 0.02), T))))
    code, _, _ = run(capsys, "relax", "--ac", str(ac), "--t1", str(t1), "--outdir", str(tmp_path))
    assert code == 0
    rep = json.loads((tmp_path / "relax.json").read_text())
    assert rep["cole_cole"]["tau"] == pytest.approx(1e-3, rel=1e-4)
    assert rep["cole_cole"]["beta"] == pytest.approx(0.9, rel=1e-4)
    assert rep["t1"]["A_dir"] == pytest.approx(50.0, rel=1e-6)


def test_fit_from_files(capsys, tmp_path):
    model = fitting.PowderChiT(20)
    T = np.geomspace(2, 300, 10)
    ds = fitting.Dataset({"T": T, "H": np.full(T.size, 0.1)}, np.zeros(T.size))
    y = model({"D": -2.96, "E": 0.06, "g": 2.16, "tip": 1e-4}, ds)
    (tmp_path / "chiT.csv").write_text("T_K,H_T,value\n" + "".join(f"{a:.17g},0.1,{b:.17g}\n" for a, b in zip(T, y)))
    prob = {"model": "powder_chiT", "data": "chiT.csv", "free": {"g": [1.9, 2.4, 2.0]},
            "fixed": {"D": -2.96, "E": 0.06, "tip": 1e-4}, "n_starts": 2, "orientation_points": 20}
    (tmp_path / "p.json").write_text(json.dumps(prob))
    code, _, _ = run(capsys, "fit", str(tmp_path / "p.json"), "--outdir", str(tmp_path))
    assert code == 0
    res = json.loads((tmp_path / "fit_result.json").read_text())
    assert res["params"]["g"] == pytest.approx(2.16, rel=1e-6)
    assert (tmp_path / "fit_residuals.csv").exists()


def test_fit_rejects_unknown_model(capsys, tmp_path):
    (tmp_path / "d.csv").write_text("T_K,H_T,value\n2,1,0.5\n")
    (tmp_path / "p.json").write_text(json.dumps({"model": "nope", "data": "d.csv", "free": {}}))
    assert run(capsys, "fit", str(tmp_path / "p.json"))[0] == 2


def test_reproduce_fig2(capsys, tmp_path):
    code, out, _ = run(capsys, "reproduce", "fig2", "--outdir", str(tmp_path))
    assert code == 0
    assert {"fig2_magnetic.csv", "fig2_debye.csv", "fig2_levels.csv"} <= {p.name for p in tmp_path.iterdir()}


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "spinclock.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("levels", "heatcap", "magnetize", "suscept", "powder", "mc", "cluster", "relax", "fit", "rabi", "reproduce"):
        assert cmd in r.stdout
