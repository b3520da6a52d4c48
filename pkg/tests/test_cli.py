import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from qoz import __version__
from qoz.cli import DEFAULTS, run
from qoz.grid import Axis, ComplexGrid


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def manifest(path):
    return json.loads((path / "manifest.json").read_text())


SMALL_OZ = ["--set", "q_max=10.0", "--set", "n_half=200", "--set", "n_p=1"]


# -- happy paths ----------------------------------------------------------------------


def test_series_eval_outputs(tmp_path):
    out = tmp_path / "s"
    assert run(["series-eval", "--out", str(out), "--set", "positions=[0.5, -0.3]",
                "--set", "momenta=[1.0, 0.2]"]) == 0
    rows = read_csv(out / "series.csv")
    assert rows[0][:4] == ["q0_0", "q1_0", "p0_0", "p1_0"]
    assert [float(v) for v in rows[1][:4]] == [0.5, -0.3, 1.0, 0.2]
    assert len(rows) == 1 + DEFAULTS["series-eval"]["order"]
    m = manifest(out)
    assert m["command"] == "series-eval" and m["version"] == __version__ and m["status"] == "ok"
    assert m["config"]["positions"] == [0.5, -0.3]
    assert sorted(m["outputs"]) == ["omega.csv", "series.csv"]


def test_symmetrize_from_csv(tmp_path, capsys):
    cfg = tmp_path / "cfg.csv"
    cfg.write_text("# q,p\n0.0,0.3\n0.4,-0.2\n1.1,0.5\n")
    out = tmp_path / "sym"
    assert run(["symmetrize", "--input", str(cfg), "--statistics", "fermi", "--out", str(out)]) == 0
    rows = {r[0]: (float(r[1]), float(r[2])) for r in read_csv(out / "symmetrize.csv")[1:]}
    assert set(rows) >= {"eta2", "eta3", "truncated_sum", "exponential", "bruteforce", "discrepancy"}
    assert abs(complex(*rows["discrepancy"])) < 1e-14
    assert "bruteforce" in capsys.readouterr().out


def test_linear_solve_small(tmp_path):
    out = tmp_path / "lin"
    assert run(["linear-solve", "--out", str(out), "--set", "grid.n=32", "--set", "momenta.count=3",
                "--set", "nonlinear_check=true"]) == 0
    table = ComplexGrid.load(out / "linear.qozgrid")
    assert table.data.shape == (3, 32, 32)
    assert len(read_csv(out / "asymptotes.csv")) == 4
    assert "correction.csv" in manifest(out)["outputs"]


def test_pde_integrate_singlet(tmp_path):
    out = tmp_path / "pde"
    code = run(["pde-integrate", "--out", str(out), "--steps", "40", "--set", "singlet.nodes=81",
                "--set", "singlet.p_count=9", "--set", "checkpoint_every=20"])
    assert code == 0
    outs = manifest(out)["outputs"]
    assert "trajectory.csv" in outs and any(o.startswith("checkpoint_") for o in outs)


def test_pde_integrate_pair_blowup_exit_code(tmp_path):
    out = tmp_path / "blow"
    code = run(["pde-integrate", "--mode", "pair", "--out", str(out), "--steps", "50",
                "--set", "grid.n=32", "--set", "p_z=[20.0]", "--beta-final", "2.0"])
    assert code == 2
    assert manifest(out)["status"] == "flagged"


def test_eigen_table_sho(tmp_path):
    out = tmp_path / "eig"
    assert run(["eigen-table", "--out", str(out), "--set", "n_states=60", "--set", "table_nodes=21"]) == 0
    grid = ComplexGrid.load(out / "singlet.qozgrid")
    assert grid.data.shape == (21, 21)
    v = grid.data
    assert np.max(np.abs(v[:, ::-1] - np.conj(v))) < 1e-10


def test_oz_run_small(tmp_path, capsys):
    out = tmp_path / "oz"
    assert run(["oz-run", "--out", str(out), *SMALL_OZ]) == 0
    assert "converged=True" in capsys.readouterr().out
    header = read_csv(out / "g.csv")[0]
    assert header == ["q", "re_0_0", "im_0_0"]
    g = ComplexGrid.load(out / "g.qozgrid")
    h = ComplexGrid.load(out / "h.qozgrid")
    np.testing.assert_array_equal(g.data, 1 + h.data)
    assert len(read_csv(out / "history.csv")) > 2


def test_oz_run_nonconvergence_exit_code(tmp_path):
    out = tmp_path / "oz"
    assert run(["oz-run", "--out", str(out), *SMALL_OZ, "--set", "max_iter=3"]) == 2
    assert manifest(out)["status"] == "flagged"
    assert len(read_csv(out / "history.csv")) == 4


def test_oz_run_reads_w_table(tmp_path):
    out = tmp_path / "oz"
    q = Axis.from_nodes(np.linspace(-10, 10, 401))
    p = Axis(0.0, 1.0, 1)
    path = tmp_path / "w.qozgrid"
    ComplexGrid([p, p, q], np.zeros((1, 1, 401), dtype=complex), ["p1", "p2", "q"]).save(path)
    assert run(["oz-run", "--out", str(out), *SMALL_OZ, "--set", f'w_table="{path}"']) == 0
    ref = tmp_path / "ref"
    assert run(["oz-run", "--out", str(ref), *SMALL_OZ]) == 0
    assert (out / "h.csv").read_bytes() == (ref / "h.csv").read_bytes()
    ComplexGrid([p, p, q], np.zeros((1, 1, 401), dtype=complex)).save(path)
    assert run(["oz-run", "--out", str(out), *SMALL_OZ, "--set", "n_half=100",
                "--set", f'w_table="{path}"']) == 1


def test_selfcheck_passes(tmp_path, capsys):
    assert run(["selfcheck", "--out", str(tmp_path / "sc")]) == 0
    text = capsys.readouterr().out
    assert "FAIL" not in text and text.count("PASS") >= 10


# -- configuration --------------------------------------------------------------------


def test_toml_config_and_overrides(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('[symmetrize]\npositions = [0.0, 1.0]\nmomenta = [0.0, 0.5]\nlmax = 2\n'
                   '[series-eval]\nbeta = 0.3\n')
    out = tmp_path / "a"
    assert run(["symmetrize", "--config", str(cfg), "--out", str(out), "--set", "beta=2.0"]) == 0
    m = manifest(out)["config"]
    assert m["positions"] == [0.0, 1.0] and m["lmax"] == 2 and m["beta"] == 2.0
    top = tmp_path / "top.toml"
    top.write_text("beta = 0.25\n[pair]\nkind = \"gaussian\"\n")
    out2 = tmp_path / "b"
    assert run(["series-eval", "--config", str(top), "--out", str(out2), "--set", "pair.width=0.5"]) == 0
    m2 = manifest(out2)["config"]
    assert m2["beta"] == 0.25 and m2["pair"] == {"kind": "gaussian", "width": 0.5}


def test_manifest_reproduces_run(tmp_path):
    first = tmp_path / "first"
    assert run(["symmetrize", "--out", str(first), "--set", "positions=[0.1, 0.7, 1.9, 2.2]",
                "--set", "momenta=[1.0, -0.5, 0.2, 0.0]"]) == 0
    second = tmp_path / "second"
    assert run(["symmetrize", "--config", str(first / "manifest.json"), "--out", str(second)]) == 0
    assert (first / "symmetrize.csv").read_bytes() == (second / "symmetrize.csv").read_bytes()
    assert manifest(first) == manifest(second)


def test_determinism(tmp_path):
    for name in ("a", "b"):
        assert run(["series-eval", "--out", str(tmp_path / name), "--set", "order=4",
                    "--set", 'pair={kind="gaussian"}', "--set", "positions=[0.0, 1.3]",
                    "--set", "momenta=[0.4, -0.4]", "--threads", "1"]) == 0
    for f in ("series.csv", "omega.csv", "manifest.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_data_dir_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("QOZ_DATA_DIR", str(tmp_path / "data"))
    assert run(["selfcheck"]) == 0
    assert (tmp_path / "data" / "selfcheck" / "manifest.json").exists()
    monkeypatch.delenv("QOZ_DATA_DIR")
    monkeypatch.chdir(tmp_path)
    assert run(["symmetrize"]) == 0
    assert (tmp_path / "qoz-out" / "symmetrize" / "symmetrize.csv").exists()


# -- usage errors ---------------------------------------------------------------------


@pytest.mark.parametrize("argv", [
    [],
    ["no-such-command"],
    ["symmetrize", "--set", "novalue"],
    ["symmetrize", "--statistics", "anyon"],
    ["series-eval", "--set", 'pair={kind="morse"}'],
    ["oz-run", "--set", 'pair={kind="lj"}'],
    ["linear-solve", "--set", 'pair={kind="none"}'],
    ["symmetrize", "--config", "/nonexistent/file.toml"],
    ["symmetrize", "--set", "lmax=9"],
    ["weight-eval", "--epsilon", "-1"],
])
def test_usage_errors(tmp_path, argv, capsys):
    if argv and argv[0] not in ("no-such-command",):
        argv = argv + ["--out", str(tmp_path / "x")]
    assert run(argv) == 1
    assert capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qoz", "symmetrize", "--out", str(tmp_path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert "truncated_sum" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "qoz", "--version"], capture_output=True, text=True)
    assert __version__ in proc.stdout
