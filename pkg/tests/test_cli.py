import json
import subprocess
import sys

import numpy as np
import pytest

from orliczkit.cli import ConfigError, RunConfig, load_config, main
from orliczkit.radial import read_csv


def test_inspect(capsys):
    assert main(["inspect", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["K"] == 4.0 and out["result"]["l"] == 2.0


def test_verify_power_two(capsys):
    assert main(["verify", "--samples", "200"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_verify_reports_failure_exit_one(capsys):
    assert main(["verify", "--family", "power_log", "--p", "2.6", "--samples", "50"]) == 1


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--config", str(bad)]) == 2


def test_missing_config_file(capsys):
    assert main(["verify", "--config", "/nonexistent/cfg.json"]) == 2


def test_unknown_fields_rejected(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nfunction": {"family": "power", "p": 2}, "colour": "red"}))
    assert main(["inspect", "--config", str(cfg)]) == 2
    cfg.write_text(json.dumps({"grid": {"N": 3, "Rmax": 2}}))
    assert main(["inspect", "--config", str(cfg)]) == 2


def test_solve_outside_window(capsys):
    assert main(["solve", "--exponent", "7", "--nodes", "200"]) == 2
    assert "admissibility window" in capsys.readouterr().err


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nfunction": {"family": "power", "p": 2.0},
                               "grid": {"N": 3, "R_max": 10.0, "M": 500}}))
    rc = load_config(["inspect", "--config", str(cfg), "--p", "2.5", "--nodes", "800"])
    assert rc.nfunction.p == 2.5 and rc.grid["M"] == 800 and rc.grid["R_max"] == 10.0


def test_solve_outputs_are_deterministic(tmp_path, capsys):
    args = ["solve", "--exponent", "4", "--rmax", "16", "--nodes", "800", "--format", "json"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "solve.json").read_bytes()
    b = (tmp_path / "b" / "solve.json").read_bytes()
    assert a == b
    meta = json.loads((tmp_path / "a" / "solve.meta.json").read_text())
    assert "timestamp" in meta["meta"]
    u = read_csv(tmp_path / "a" / "solution.csv", 3)
    assert u.values[0] > 0
    text = (tmp_path / "a" / "solution.csv").read_text().splitlines()
    vals = np.array([float(line.split(",")[1]) for line in text[1:]])
    assert np.array_equal(np.array([float(f"{v:.15g}") for v in vals]),
                          np.array([float(f"{v:.15g}") for v in u.values]))


def test_lions_csv(tmp_path, capsys):
    assert main(["lions", "--format", "csv", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "lions.csv").read_text().splitlines()
    assert lines[0] == "n,window,modular_A,norm_B,sobolev_modular"


def test_strauss_with_profile(tmp_path, capsys):
    prof = tmp_path / "p.csv"
    r = np.linspace(0, 10, 401)
    prof.write_text("r,value\n" + "".join(f"{a:.17g},{np.exp(-a * a):.17g}\n" for a in r))
    assert main(["strauss", "--profile", str(prof)]) == 0
    assert main(["strauss", "--profile", str(tmp_path / "missing.csv")]) == 2


def test_conjugate_command(capsys):
    assert main(["conjugate", "--family", "curvature", "--gamma", "1.5", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["sobolev_conjugate"]["m_star"] == "inf"


def test_runconfig_validation():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"command": "plot"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"command": "inspect", "format": "xml"})


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "orliczkit", "inspect"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "inspect: ok" in proc.stdout
