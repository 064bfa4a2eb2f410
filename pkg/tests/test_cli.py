import hashlib
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from halfliouville import cli


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def _manifest(out: Path) -> dict:
    return json.loads((out / "MANIFEST.json").read_text())


# ----------------------------------------------------------------- configs

def test_config_defaults_and_schedule():
    cfg = cli.ExperimentConfig("blowup")
    assert cfg.effective_schedule() == [0.3, 0.1, 0.03, 0.01]
    cfg = cli.ExperimentConfig("blowup", family="circle")
    assert cfg.effective_schedule() == [0.9, 0.99, 0.999]


@given(st.sampled_from(cli.COMMANDS), st.sampled_from([8, 64, 1024]),
       st.floats(1e-14, 1e-2), st.lists(st.floats(0.01, 1.5), min_size=1, max_size=4, unique=True),
       st.integers(0, 10 ** 6))
def test_config_json_round_trip(command, n, tol, deltas, seed):
    cfg = cli.ExperimentConfig(command, n=n, tol=tol, deltas=deltas, seed=seed)
    cfg.validate()
    back = cli.ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.to_json() == cfg.to_json()


@pytest.mark.parametrize("field,value", [
    ("n", 100), ("tol", -1.0), ("family", "spiral"), ("schedule", [0.1, 0.3, 0.2]),
    ("deltas", [2.0]), ("level", 9), ("alpha", 4.0), ("kappa", "bogus:1"), ("eps", [0.0]),
])
def test_invalid_config_fields(field, value):
    with pytest.raises(cli.ConfigError) as info:
        cli.ExperimentConfig.from_dict({"command": "solve", field: value})
    assert field in info.value.errors


def test_unknown_and_missing_fields():
    with pytest.raises(cli.ConfigError) as info:
        cli.ExperimentConfig.from_dict({"command": "solve", "colour": 1})
    assert "colour" in info.value.errors
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.from_dict({"n": 64})


def test_parse_field_spec(tmp_path):
    th = 2 * np.pi * np.arange(16) / 16
    assert np.all(cli.parse_field_spec("const:2.5", 16) == 2.5)
    v = cli.parse_field_spec("trig:1|0.1|0,0.2", 16)
    assert np.allclose(v, 1 + 0.1 * np.cos(th) + 0.2 * np.sin(2 * th))
    p = tmp_path / "k.json"
    p.write_text(json.dumps({"samples": list(np.cos(th))}))
    assert np.allclose(cli.parse_field_spec(str(p), 32), np.cos(2 * np.pi * np.arange(32) / 32))
    p.write_text(json.dumps({"a0": 1.0, "cos": [0.5]}))
    assert np.allclose(cli.parse_field_spec(str(p), 16), 1 + 0.5 * np.cos(th))
    with pytest.raises(cli.ConfigError):
        cli.parse_field_spec("trig:x", 16)


def test_invalid_config_exits_2(tmp_path, capsys):
    code, _ = _run(tmp_path, "solve", "--n", "100", "--tol", "-1")
    assert code == 2
    err = capsys.readouterr().err
    assert "n: must be a power of two" in err and "tol: must be positive" in err


def test_bad_config_file_exits_2(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    code, _ = _run(tmp_path, "solve", "--config", str(p))
    assert code == 2
    assert "invalid JSON" in capsys.readouterr().err


# -------------------------------------------------------------- experiments

def test_solve_report_and_manifest(tmp_path):
    code, out = _run(tmp_path, "solve", "--kappa", "const:1", "--init-noise", "0.05", "--n", "256")
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["residual_sup"] <= 1e-10 and rep["degree"] == 1
    assert rep["moebius_fit"]["sup_error"] <= 1e-6
    man = _manifest(out)
    assert man["status"] == "ok"
    names = {f["path"] for f in man["files"]}
    assert {"config.json", "report.json", "solution.csv", "curve.csv", "curve.svg"} <= names
    for f in man["files"]:
        assert hashlib.sha256((out / f["path"]).read_bytes()).hexdigest() == f["sha256"]


def test_obstructed_solve_exits_3_with_partial_manifest(tmp_path, capsys):
    code, out = _run(tmp_path, "solve", "--kappa", "trig:1|0.1", "--n", "128", "--max-iter", "10")
    assert code == 3
    man = _manifest(out)
    assert man["status"] == "failed" and "did not converge" in man["message"]
    rep = json.loads((out / "report.json").read_text())
    assert rep["balance_moment"][1] < -0.1
    assert "error:" in capsys.readouterr().err


def test_blowup_masses_csv(tmp_path):
    code, out = _run(tmp_path, "blowup", "--family", "circle", "--schedule", "0.5,0.9",
                     "--deltas", "0.3", "--no-svg")
    assert code == 0
    lines = (out / "masses.csv").read_text().splitlines()
    assert lines[0] == "param,center,delta,mass,absmass"
    assert len(lines) == 3
    assert not list(out.glob("*.svg"))
    s = json.loads((out / "summary.json").read_text())
    assert all(abs(m["total"] - 2 * np.pi) < 1e-10 for m in s["members"])


def test_verify_suite(tmp_path):
    code, out = _run(tmp_path, "verify")
    assert code == 0
    s = json.loads((out / "summary.json").read_text())
    assert s["failed"] == [] and s["checks"] == len(cli.trivial_checks())


def test_spectral_check(tmp_path):
    code, out = _run(tmp_path, "spectral-check", "--n", "256")
    assert code == 0
    assert json.loads((out / "summary.json").read_text())["passed"]


def test_sc_profile_command(tmp_path):
    code, out = _run(tmp_path, "sc-profile", "--alpha", str(np.pi / 2))
    assert code == 0
    s = json.loads((out / "summary.json").read_text())
    assert s["corner_angle_at_i"] == pytest.approx(np.pi / 2, abs=1e-4)
    assert s["spread_plus"] < 1e-12


def test_determinism(tmp_path):
    args = ("curve", "--factor", "trig:0|0.1,0.2|0.05", "--n", "128")
    _, a = _run(tmp_path, *args, name="a")
    _, b = _run(tmp_path, *args, name="b")
    ma, mb = _manifest(a), _manifest(b)
    assert ma["files"] == mb["files"]
    for f in ma["files"]:
        assert (a / f["path"]).read_bytes() == (b / f["path"]).read_bytes()


def test_env_output_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("LIOUVILLE_OUT", str(tmp_path / "env"))
    assert cli.main(["verify"]) == 0
    assert (tmp_path / "env" / "MANIFEST.json").exists()


def test_config_file_overrides_flags(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"n": 64, "kappa": "const:2"}))
    code, out = _run(tmp_path, "solve", "--n", "512", "--config", str(p))
    assert code == 0
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["n"] == 64 and cfg["kappa"] == "const:2"
    p.write_text(json.dumps({"command": "mt"}))
    assert _run(tmp_path, "solve", "--config", str(p), name="x")[0] == 2


def test_csv_has_seventeen_digits(tmp_path):
    _, out = _run(tmp_path, "curve", "--n", "64", "--no-svg")
    rows = np.genfromtxt(out / "solution.csv", delimiter=",", names=True)
    text = (out / "solution.csv").read_text().splitlines()[2].split(",")
    assert float(text[0]) == rows["theta"][1]
    # %.17g round-trips every double exactly
    assert all(float(t) == float(f"{float(t):.17g}") for t in text)
    assert len(text[0].replace(".", "").replace("-", "").lstrip("0")) >= 16


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "halfliouville", "verify", "--out", str(tmp_path / "m")],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    r = subprocess.run([sys.executable, "-m", "halfliouville", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "spectral-check" in r.stdout
