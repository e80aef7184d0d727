import json
import subprocess
import sys

import numpy as np
import pytest

from thermo_tdbem import cli, geometry, io, kernels, operators, verify
from thermo_tdbem.errors import ValidationError


@pytest.mark.parametrize("text,val", [("2+1i", 2 + 1j), ("1", 1), ("-3.5i", -3.5j), ("1e-3-2e2i", 1e-3 - 200j),
                                      (".5+.25i", 0.5 + 0.25j), (" 2 - 1i ", 2 - 1j)])
def test_parse_complex(text, val):
    assert io.parse_complex(text) == val


@pytest.mark.parametrize("text", ["", "abc", "1+", "1+2", "i", "1++2i", "2j3"])
def test_parse_complex_rejects(text):
    with pytest.raises(ValidationError):
        io.parse_complex(text)


def test_complex_roundtrip():
    z = 0.1 - 1 / 3j
    assert io.parse_complex(io.format_complex(z)) == z


def test_matrix_and_density_roundtrip(mat, circle32):
    A = operators.assemble("K", mat, 1 + 1j, circle32)
    B = io.matrix_from_dict(json.loads(io.dumps(io.matrix_to_dict(A))), 2)
    np.testing.assert_array_equal(A.entries, B.entries)
    assert (B.domain, B.range) == (A.domain, A.range)
    d = operators.Density(np.arange(6) * (1 + 2j), "minus_half")
    e = io.density_from_dict(json.loads(io.dumps(io.density_to_dict(d))))
    np.testing.assert_array_equal(d.values, e.values)
    assert e.space == d.space


def test_field_csv_format():
    text = io.field_csv(np.array([[1.0, 2.0]]), np.array([[1 + 2j, 0.1]]))
    assert text == "x,y,re_0,im_0,re_1,im_1\n1,2,1,2,0.10000000000000001,0\n"


def test_signal_csv_roundtrip(tmp_path):
    t = np.linspace(0, 1, 5)
    y = np.exp(1j * t)[:, None] * np.array([1, 2])
    p = tmp_path / "s.csv"
    p.write_text(io.signal_csv(t, y))
    t2, y2 = io.read_signal_csv(p)
    np.testing.assert_array_equal(t2, t)
    np.testing.assert_array_equal(y2, y)


def run(argv, capsys):
    code = cli.run_command(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path, capsys):
    mat = tmp_path / "mat.json"
    mat.write_text(json.dumps({"rho": 1.0, "lambda": 1.3, "mu": 0.9, "gamma": 0.5, "eta": 0.4, "kappa": 1.1}))
    mesh = tmp_path / "mesh.json"
    assert run(["mesh", "make", "circle", "--radius", "1", "--n", "16", "--out", str(mesh)], capsys)[0] == 0
    return mat, mesh


def test_mesh_make_reports_weight_sum(tmp_path, capsys):
    code, out, _ = run(["mesh", "make", "circle", "--radius", "1", "--n", "64",
                        "--out", str(tmp_path / "m.json")], capsys)
    assert code == 0 and "sum of weights" in out
    total = float(out.split("=")[1].split()[0])
    assert total == pytest.approx(2 * np.pi, rel=1e-14)
    mesh = io.load_mesh(tmp_path / "m.json")
    assert mesh.size == 128


def test_kernel_eval_matches_library(files, capsys):
    mat, _ = files
    code, out, _ = run(["kernel", "eval", "--dim", "3", "--config", str(mat), "--s", "2+1i",
                        "--x", "0,0,0", "--y", "1,0,0"], capsys)
    assert code == 0
    got = np.array(json.loads(out)["entries"])
    E = got[..., 0] + 1j * got[..., 1]
    ref = kernels.fundamental_matrix(3, io.load_material(mat), 2 + 1j, [0, 0, 0], [1, 0, 0]).entries
    assert E.shape == (4, 4)
    np.testing.assert_array_equal(E, ref)


def test_kernel_residual(files, capsys, tmp_path):
    mat, _ = files
    code, out, _ = run(["kernel", "residual", "--dim", "2", "--config", str(mat), "--n", "5",
                        "--out", str(tmp_path / "r")], capsys)
    assert code == 0 and "PASS" in out
    assert (tmp_path / "r" / "pde_residual_E_2d.json").exists()


def test_assemble(files, capsys, tmp_path):
    mat, mesh = files
    o = tmp_path / "V.json"
    assert run(["assemble", "--kind", "V", "--s", "1+1i", "--mesh", str(mesh), "--config", str(mat),
                "--out", str(o), "--seed", "3"], capsys)[0] == 0
    d = json.loads(o.read_text())
    assert d["m"] == d["n"] == 96 and d["seed"] == 3


def test_solve_laplace(files, capsys, tmp_path):
    mat, mesh = files
    code, out, err = run(["solve", "laplace", "--mesh", str(mesh), "--config", str(mat), "--s", "1+2i",
                          "--probes", "2,0;0,3", "--out", str(tmp_path / "f.csv")], capsys)
    assert code == 0
    assert json.loads(err.strip().splitlines()[-1])["relative_error"] < 1e-8
    assert (tmp_path / "f.csv").read_text().startswith("x,y,re_0")


def test_solve_td(files, capsys, tmp_path):
    mat, mesh = files
    cfg = tmp_path / "td.json"
    cfg.write_text(json.dumps({"scheme": "bdf2", "dt": 0.5, "n_steps": 16}))
    code, _, _ = run(["solve", "td", "--mesh", str(mesh), "--config", str(mat), "--td-config", str(cfg),
                      "--probes", "2,0", "--out", str(tmp_path / "td.csv")], capsys)
    assert code == 0
    t, y = io.read_signal_csv(tmp_path / "td.csv")
    assert len(t) == 17 and np.max(np.abs(y[t < 2 - 1e-9])) < 1e-12


def test_verify_dispersion_outputs_and_determinism(tmp_path, capsys):
    outs = []
    for k in range(2):
        d = tmp_path / f"r{k}"
        code, out, _ = run(["verify", "dispersion", "--seed", "11", "--out", str(d)], capsys)
        assert code == 0 and out.count("PASS") == 3
        outs.append(d)
    for f in sorted(outs[0].glob("*.csv")):
        assert f.read_bytes() == (outs[1] / f.name).read_bytes()
    assert json.loads((outs[0] / "dispersion.json").read_text())["seed"] == 11


def test_failing_probe_exits_2(monkeypatch, capsys):
    bad = verify.ProbeReport("broken", [0], [1.0], [0.0], 0.0, {}, False)
    monkeypatch.setattr(cli, "run_suite", lambda name, args: [bad])
    code, out, err = run(["verify", "dispersion"], capsys)
    assert code == 2 and "broken: FAIL" in out and "broken" in err


@pytest.mark.parametrize("argv", [
    ["kernel", "eval", "--dim", "2", "--s", "2+1x", "--x", "0,0", "--y", "1,0"],
    ["kernel", "eval", "--dim", "2", "--s", "1", "--x", "0,0", "--y", "0,0"],
    ["bogus"],
    ["assemble", "--kind", "V", "--s", "1", "--mesh", "/nonexistent.json"],
])
def test_validation_errors_exit_1(argv, capsys):
    assert run(argv, capsys)[0] == 1


def test_threads_env(monkeypatch):
    monkeypatch.setenv("THERMO_TDBEM_THREADS", "3")
    assert cli.default_threads() == 3
    monkeypatch.delenv("THERMO_TDBEM_THREADS")
    assert cli.default_threads() >= 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "thermo_tdbem", "kernel", "eval", "--dim", "2", "--s", "1",
                        "--x", "0,0", "--y", "1,0"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["dim"] == 2
