from __future__ import annotations

import json

import pytest

from pwlmaps.cli import join_negative_values, main


def _kv(text: str) -> dict[str, str]:
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


POINT = ["--tauL", "2", "--deltaL", "0.75", "--tauR", "-0.45", "--deltaR", "1.4"]


def test_params_reduce(capsys):
    assert main(["params-reduce", *POINT]) == 0
    out = _kv(capsys.readouterr().out)
    assert float(out["eta"]) == pytest.approx(0.023125, rel=1e-10)
    assert float(out["nu"]) == pytest.approx(0.0875, rel=1e-10)
    assert float(out["sigma"]) == pytest.approx(1.5)


def test_params_reduce_writes_json(tmp_path, capsys):
    assert main(["params-reduce", *POINT, "--out", str(tmp_path)]) == 0
    files = list(tmp_path.glob("*.json"))
    assert files
    data = json.loads(files[0].read_text())
    assert "eta" in json.dumps(data)


def test_locate_codim2(capsys):
    assert main(["locate-codim2", "--fix", "tauL=2,deltaL=0.75", "--guess", "deltaR=1.4,tauR=-0.45"]) == 0
    out = _kv(capsys.readouterr().out)
    assert float(out["tauR"]) == pytest.approx(-0.5, abs=1e-8)
    assert float(out["deltaR"]) == pytest.approx(1.5, abs=1e-8)


def test_cycle(capsys):
    argv = ["cycle", "--tauL", "2", "--deltaL", "0.75", "--tauR", "-0.484", "--deltaR", "1.433", "--word", "L8R2"]
    assert main(argv) == 0
    out = _kv(capsys.readouterr().out)
    assert out["itinerary"] == "L^8R^2" and out["period"] == "10" and out["stable"] == "True"


def test_scan_1d_outputs(tmp_path, capsys):
    argv = ["scan-1d", "--eta", "0.01:0.1:4", "--nu", "0.01:0.1:3", "--sigma", "1.5", "--out", str(tmp_path)]
    assert main(argv) == 0
    for ext in ("csv", "pgm", "json"):
        assert (tmp_path / f"scan.{ext}").exists()
    assert len((tmp_path / "scan.csv").read_text().splitlines()) == 13
    meta = json.loads((tmp_path / "scan.json").read_text())
    assert meta["resolution"] == [4, 3]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("eta=0.01:0.1:3\nnu=0.01:0.1:3\nsigma=1.5\nseed=7\n")
    out = tmp_path / "o"
    assert main(["--config", str(cfg), "scan-1d", "--out", str(out), "--seed", "9"]) == 0
    assert json.loads((out / "scan.json").read_text())["seed"] == 9
    out2 = tmp_path / "o2"
    assert main(["--config", str(cfg), "scan-1d", "--out", str(out2)]) == 0
    assert json.loads((out2 / "scan.json").read_text())["seed"] == 7


def test_errors_exit_with_code_two(tmp_path, capsys):
    # a point outside the admissible parameter set
    assert main(["params-reduce", "--tauL", "1", "--deltaL", "0.75", "--tauR", "-0.45", "--deltaR", "1.4"]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["params-reduce", "--tauL", "2"]) == 2
    assert main(["scan-1d", "--eta", "0.1:0.01", "--nu", "0.01:0.1:3", "--sigma", "1.5", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus=1\n")
    assert main(["--config", str(bad), "params-reduce", *POINT]) == 2


def test_negative_values_are_joined():
    assert join_negative_values(["--tauR", "-0.6:-0.4:20", "--x", "1"]) == ["--tauR=-0.6:-0.4:20", "--x", "1"]
