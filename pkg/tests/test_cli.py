import csv
import hashlib
import json
import os

import pytest

from sharpqm import cli
from sharpqm.errors import ConvergenceError
from sharpqm.units import DEFAULT_SCALE


def _run(argv, out):
    return cli.run(list(argv) + ["--out", str(out)])


def _csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


def test_spectrum_outputs(tmp_path):
    assert _run(["spectrum", "--n-max", "3"], tmp_path) == 0
    rows = _csv(tmp_path / "levels.csv")
    assert rows[0][0] == "n"
    assert rows[1] == ["1", "1", "-0.5"]
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "spectrum" and man["config"]["spectrum"]["n_max"] == 3
    for entry in man["outputs"]:
        data = (tmp_path / entry["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"] and len(data) == entry["bytes"]


def test_outputs_deterministic(tmp_path):
    hashes = []
    for d in ("a", "b"):
        assert _run(["radiate", "--seed", "5"], tmp_path / d) == 0
        man = json.loads((tmp_path / d / "manifest.json").read_text())
        hashes.append({o["path"]: o["sha256"] for o in man["outputs"]})
    assert hashes[0] == hashes[1]


def test_hartree_relations(tmp_path):
    cfg = {"schema_version": 1, "hartree": {"grid_count": 2000, "tol": 1e-8}}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    assert cli.run(["hartree", "--config", str(p), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "hartree.json").read_text())
    assert rep["result"]["E_g"] == pytest.approx(-0.04622, abs=5e-5)
    assert rep["result"]["F"] == pytest.approx(-0.24397, abs=5e-5)
    assert all(rep["relations"]["flags"].values())


def test_si_units(tmp_path):
    assert _run(["spectrum", "--n-max", "2", "--units", "si"], tmp_path) == 0
    rows = _csv(tmp_path / "levels.csv")
    col = next(i for i, h in enumerate(rows[0]) if h.endswith("[J]"))
    assert float(rows[1][col]) == pytest.approx(-0.5 * DEFAULT_SCALE.unit_si("energy"), rel=1e-15)


@pytest.mark.parametrize(
    "content",
    [
        "{not json",
        json.dumps({"schema_version": 1, "bogus": 1}),
        json.dumps({"schema_version": 1, "spectrum": {"n_max": 0}}),
        json.dumps({"schema_version": 1, "spectrum": {"nmax": 3}}),
        json.dumps({"schema_version": 2}),
        json.dumps({"schema_version": 1, "command": "hartree"}),
    ],
)
def test_bad_config_exit_2_without_files(tmp_path, capsys, content):
    p = tmp_path / "cfg.json"
    p.write_text(content)
    out = tmp_path / "o"
    assert cli.run(["spectrum", "--config", str(p), "--out", str(out)]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"]["exit_code"] == 2
    assert not out.exists()


def test_bad_flag_exit_2(tmp_path, capsys):
    assert _run(["spectrum", "--n-max", "many"], tmp_path / "o") == 2
    assert _run(["nosuchcommand"], tmp_path / "o") == 2
    assert _run(["trajectory", "--state", "100+:0"], tmp_path / "o") == 2
    assert not (tmp_path / "o").exists()


def test_anchor_on_node_exit_3(tmp_path, capsys):
    assert _run(["trajectory", "--state", "210+:1", "--anchor", "1,0,0"], tmp_path / "o") == 3
    assert json.loads(capsys.readouterr().err)["error"]["type"] == "NodeProximityError"
    assert not (tmp_path / "o").exists()


def test_convergence_failure_exit_3(tmp_path, monkeypatch, capsys):
    def boom(cfg, ctx):
        raise ConvergenceError("did not converge")

    monkeypatch.setitem(cli.HANDLERS, "spectrum", boom)
    assert _run(["spectrum"], tmp_path / "o") == 3
    assert json.loads(capsys.readouterr().err)["error"]["type"] == "ConvergenceError"
    assert not (tmp_path / "o").exists()


def test_emit_plotdata_format(tmp_path):
    data = cli.emit_plotdata({"x": [0.1, -0.0], "y": [1, 2]}, str(tmp_path / "p.csv"))
    assert data == b"x,y\n0.10000000000000001,1\n0,2\n"
    assert (tmp_path / "p.csv").read_bytes() == data
    assert cli.emit_plotdata({"x": [], "y": []}) == b"x,y\n"
    with pytest.raises(Exception):
        cli.emit_plotdata({"x": [1.0], "y": []})


def test_figures(tmp_path):
    pytest.importorskip("matplotlib")
    assert _run(["photon", "--figures"], tmp_path) == 0
    pngs = sorted(f for f in os.listdir(tmp_path) if f.endswith(".png"))
    assert pngs and (tmp_path / pngs[0]).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert set(pngs) <= {o["path"] for o in man["outputs"]}


def test_photon_and_fields(tmp_path):
    assert _run(["photon"], tmp_path / "p") == 0
    rep = json.loads((tmp_path / "p" / "photon.json").read_text())
    assert all(abs(p["max_speed_over_c"] - 1) < 1e-8 for p in rep["paths"])
    assert _run(["fields"], tmp_path / "f") == 0
    rep = json.loads((tmp_path / "f" / "fields.json").read_text())
    assert rep["field_energy"] == pytest.approx(11.0, abs=1e-12)
    assert rep["oracle_relative_difference"] < 5e-3


def test_trajectory_and_help(tmp_path, capsys):
    assert _run(["trajectory", "--t-end", "2.0"], tmp_path) == 0
    rows = _csv(tmp_path / "trajectory.csv")
    assert rows[0][:4] == ["tau", "Q_x", "Q_y", "Q_z"] and len(rows) > 10
    with pytest.raises(SystemExit) as exc:
        cli.run(["--version"])
    assert exc.value.code == 0
