import json
import subprocess
import sys
from pathlib import Path

import pytest

from spinqip.cli import main
from spinqip.hamiltonians import spin_system_to_dict, malonic_acid_fixture

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def data_files(d: Path):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "manifest.json"}


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    for name in ("grape", "dd-bench", "sim-ising", "sim-fano", "sim-burgers", "sim-particle", "adiabatic"):
        assert name in out
    assert main(["list-experiments", "--schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert set(schema["parameters"]) >= {"grape", "sim-ising"}


def test_validate_examples(tmp_path, capsys):
    for cfg in sorted(CONFIGS.glob("*.json")):
        assert main(["validate", str(cfg)]) == 0, cfg
    fixture = write(tmp_path, spin_system_to_dict(malonic_acid_fixture().system), "mal.json")
    assert main(["validate", fixture]) == 0


def test_validate_reports_cap_and_field_errors(tmp_path, capsys):
    big = {"units": {}, "spins": [{"label": f"s{i}", "gyromagnetic_ratio": 1.0} for i in range(20)]}
    assert main(["validate", write(tmp_path, big)]) == 2
    assert "dimension cap exceeded" in capsys.readouterr().out
    neg = {"experiment": "sim-ising", "parameters": {"T_min": -0.5}}
    assert main(["validate", write(tmp_path, neg)]) == 2
    out = capsys.readouterr().out.strip().splitlines()
    assert out == ["parameters.T_min: Input should be greater than 0"]
    assert main(["validate", str(tmp_path / "missing.json")]) == 2


def test_run_sim_ising(tmp_path):
    out = tmp_path / "ising"
    assert main(["run", str(CONFIGS / "sim_ising.json"), "--output-dir", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["oracle_deltas"]["magnetization_vs_brute_force"] <= 1e-10
    assert manifest["oracle_deltas"]["entropy_vs_brute_force"] <= 1e-10
    listed = {f["file"] for f in manifest["outputs"]}
    assert listed == {"magnetization.csv", "entropy.csv"}
    # no orphan files: everything but the manifest is listed
    assert {p.name for p in out.iterdir()} == listed | {"manifest.json"}
    from spinqip.io import sha256_file
    for f in manifest["outputs"]:
        assert sha256_file(out / f["file"]) == f["sha256"]


@pytest.mark.parametrize("name", ["grape_x90", "dd_bench_ou", "sim_burgers", "adiabatic", "sim_fano"])
def test_rerun_is_byte_identical(tmp_path, name):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = str(CONFIGS / f"{name}.json")
    assert main(["run", cfg, "--output-dir", str(a)]) == 0
    assert main(["run", cfg, "--output-dir", str(b)]) == 0
    assert data_files(a) == data_files(b)


def test_seed_override_changes_stochastic_output(tmp_path):
    cfg = str(CONFIGS / "dd_bench_ou.json")
    assert main(["run", cfg, "--output-dir", str(tmp_path / "a"), "--set", "n_traj=50"]) == 0
    assert main(["run", cfg, "--output-dir", str(tmp_path / "b"), "--set", "n_traj=50", "--seed", "8"]) == 0
    assert data_files(tmp_path / "a")["benchmark.csv"] != data_files(tmp_path / "b")["benchmark.csv"]


def test_malformed_config_writes_nothing(tmp_path, capsys):
    out = tmp_path / "out"
    bad = write(tmp_path, {"experiment": "sim-isng"})
    assert main(["run", bad, "--output-dir", str(out)]) == 2
    assert not out.exists()
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config"
    unstable = write(tmp_path, {"experiment": "sim-burgers", "parameters": {"u0": 0.9}})
    assert main(["run", unstable, "--output-dir", str(out)]) == 2
    assert not out.exists()


def test_numeric_failure_exit_code(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = write(tmp_path, {"experiment": "sim-burgers", "parameters": {"cot_theta": 0.05, "u0": 0.04}})
    assert main(["run", cfg, "--output-dir", str(out)]) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "numeric-failure" and manifest["partial"] is True
    assert json.loads(capsys.readouterr().err)["error"] == "numeric"


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SPINQIP_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["run", str(CONFIGS / "sim_fano.json")]) == 0
    assert (tmp_path / "env" / "sim-fano-seed0" / "manifest.json").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "spinqip", "list-experiments"], capture_output=True, text=True)
    assert proc.returncode == 0 and "sim-burgers" in proc.stdout
