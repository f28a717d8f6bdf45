import json
from pathlib import Path

import numpy as np
import pytest

from vdl import cli, gridio
from vdl import experiments as X

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_validate_reports_problems():
    assert X.validate({}) == ["experiment: missing required field"]
    assert X.validate({"experiment": "burgers", "parameters": {"dt": -1.0}})
    assert "unknown key" in X.validate({"experiment": "burgers", "parameters": {"foo": 1}})[0]
    assert "unknown experiment" in X.validate({"experiment": "nope"})[0]
    assert X.validate({"experiment": "displace-2d"}) == []


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs_are_valid(path):
    assert X.validate(X.load_toml(path)) == []


def test_overrides_parse_toml_values():
    raw = X.apply_overrides({"experiment": "burgers"}, ["parameters.dt=0.002", "seed=3", "parameters.init=sine"])
    assert raw == {"experiment": "burgers", "parameters": {"dt": 0.002, "init": "sine"}, "seed": 3}


def test_config_defaults_fill_in():
    cfg = X.parse_config({"experiment": "burgers"})
    assert cfg.parameters.n == 1024 and cfg.parameters.dt == 1e-3
    assert cfg.to_dict()["experiment"] == "burgers"


def test_run_tensor_check(tmp_path, capsys):
    code = cli.main(["run", "--config", str(CONFIGS / "tensor-check.toml"), "--out", str(tmp_path / "a")])
    assert code == 0
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert report["schema"] == "vdl-report-1"
    assert report["status"] == "pass"
    assert {"software", "config", "wall_clock_seconds", "verdicts"} <= set(report)
    cli.main(["run", "--config", str(CONFIGS / "tensor-check.toml"), "--out", str(tmp_path / "b")])
    again = json.loads((tmp_path / "b" / "report.json").read_text())
    assert again["rows"] == report["rows"]
    assert "PASS" in capsys.readouterr().out


def test_failed_verdict_exits_two(tmp_path):
    # the blowup happens near t = 1/3, so a run to 0.1 cannot flag it
    code = cli.main(["run", "--config", str(CONFIGS / "burgers.toml"), "--set", "parameters.t_end=0.1",
                     "--out", str(tmp_path)])
    assert code == 2


def test_errors_exit_one(tmp_path, capsys):
    assert cli.main(["run", "--set", "experiment=nope", "--out", str(tmp_path)]) == 1
    assert cli.main(["validate", "--config", str(tmp_path / "missing.toml")]) == 1
    assert cli.main(["validate", "--set", "experiment=burgers", "--set", "parameters.dt=-1"]) == 1
    assert "error" in capsys.readouterr().err


def test_validate_command_ok(capsys):
    assert cli.main(["validate", "--config", str(CONFIGS / "displace-2d.toml")]) == 0
    assert capsys.readouterr().out.strip() == "ok"


def test_sample_to_stdout(capsys):
    assert cli.main(["sample", "--function", "xi_n", "--n", "3", "--grid", "16", "--period", "4"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "x,value" and len(lines) == 17
    assert float(lines[9].split(",")[1]) == 1.0


def test_sample_binary(tmp_path):
    p = tmp_path / "f.vdlgrid"
    assert cli.main(["sample", "--function", "fn2d", "--n", "2", "--t", "0.5", "--grid", "32",
                     "--format", "binary", "--out", str(p)]) == 0
    f = gridio.read_binary(p)
    assert f.values.shape == (32, 32) and np.isfinite(f.values).all()
    assert cli.main(["sample", "--function", "psi", "--format", "binary"]) == 1


def test_euler_arnold_command(tmp_path, capsys):
    out = tmp_path / "b"
    assert cli.main(["euler-arnold", "--equation", "burgers", "--n", "64", "--dt", "1e-2",
                     "--t-end", "0.1", "--snapshot-every", "5", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["equation"] == "burgers" and summary["snapshot_times"][0] == 0.0
    assert len(list(out.glob("snapshot_*.vdlgrid"))) == 3
    assert (out / "diagnostics.csv").exists()
    # restart from a written snapshot
    snap = out / "snapshot_0002.vdlgrid"
    assert cli.main(["euler-arnold", "--equation", "epdiff", "--s", "1", "--init", str(snap), "--n", "64",
                     "--dt", "1e-2", "--t-end", "0.05", "--out", str(tmp_path / "e")]) == 0
    assert cli.main(["euler-arnold", "--equation", "epdiff", "--s", "0.3", "--n", "64",
                     "--out", str(tmp_path / "x")]) == 1
