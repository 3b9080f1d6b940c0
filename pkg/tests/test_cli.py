import os
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from credal_lp import cli
from credal_lp.errors import ConfigError

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def run(*args):
    return cli.main([str(a) for a in args])


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc))
    return p


@pytest.mark.parametrize("name", ["solve_interval_1d.yaml", "solve_mixed.yaml", "experiment_robustness.yaml"])
def test_round_trip(name):
    cfg = cli.load_config(str(CONFIGS / name))
    text = cli.config_to_yaml(cfg)
    again = cli.parse_config(yaml.safe_load(text))
    assert again == cfg
    assert cli.config_to_yaml(again) == text


def test_round_trip_verify_with_oracle(tmp_path):
    doc = yaml.safe_load((CONFIGS / "solve_interval_1d.yaml").read_text())
    doc["mode"] = "verify"
    doc["oracle"] = {"grid_per_axis": 9, "selection_mode": "endpoints", "n_focal": 2}
    cfg = cli.parse_config(doc)
    assert cli.parse_config(yaml.safe_load(cli.config_to_yaml(cfg))) == cfg


def test_solve_example(tmp_path, capsys):
    out = tmp_path / "outcome.yaml"
    assert run("solve", "--config", CONFIGS / "solve_interval_1d.yaml", "--out", out) == 0
    doc = yaml.safe_load(out.read_text())
    assert doc["maximin"] == [[2.0]] and doc["punishment"] == 0.25
    assert [c["lower_utility"] for c in doc["candidates"] if c["x"] == [2.0]] == [2.0]
    assert out.read_text() == capsys.readouterr().out


def test_solve_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.yaml", tmp_path / "b.yaml"
    run("solve", "--config", CONFIGS / "solve_mixed.yaml", "--out", a)
    run("solve", "--config", CONFIGS / "solve_mixed.yaml", "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_interval_lo_above_hi_is_config_error(tmp_path, capsys):
    doc = yaml.safe_load((CONFIGS / "solve_interval_1d.yaml").read_text())
    doc["problem"]["y"][0][0] = {"interval": [2, 1]}
    assert run("solve", "--config", write(tmp_path, "c.yaml", doc)) == 2
    assert "problem.y[0][0].interval" in capsys.readouterr().err


def test_dimension_limit_is_computation_error(tmp_path, capsys):
    n, m = 8, 7
    doc = {"mode": "solve",
           "problem": {"u": [1.0] * n, "y": [[0.1] * n] * m, "z": [5.0] * m, "x_bounds": [[0, 1]] * n},
           "decision": {"grid_resolution": 1, "vertices": True}}
    assert run("solve", "--config", write(tmp_path, "c.yaml", doc)) == 3
    assert "enumeration limit" in capsys.readouterr().err


@pytest.mark.parametrize("method, field", [({"interval": {}}, "coverage"), ({"contamination": None}, "epsilon"),
                                           ({"pbox": {}}, "ks_alpha")])
def test_missing_method_parameter_is_config_error(tmp_path, capsys, method, field):
    doc = yaml.safe_load((CONFIGS / "experiment_robustness.yaml").read_text())
    doc["methods"] = [method]
    assert run("experiment", "--config", write(tmp_path, "c.yaml", doc), "--out", tmp_path / "o") == 2
    assert f"methods[0].{next(iter(method))}.{field}" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_other_config_errors(tmp_path):
    assert run("solve", "--config", tmp_path / "missing.yaml") == 2
    (tmp_path / "bad.yaml").write_text("mode: [unclosed")
    assert run("solve", "--config", tmp_path / "bad.yaml") == 2
    doc = yaml.safe_load((CONFIGS / "solve_interval_1d.yaml").read_text())
    assert run("experiment", "--config", write(tmp_path, "c.yaml", doc), "--out", tmp_path) == 2
    doc["decision"]["candidates"] = [[11.0]]
    with pytest.raises(ConfigError, match=r"decision.candidates\[0\]\[0\]"):
        cli.parse_config(doc)
    doc["decision"] = {"typo": 1}
    with pytest.raises(ConfigError, match="unknown field"):
        cli.parse_config(doc)


def test_empty_after_filter_is_computation_error(tmp_path):
    doc = yaml.safe_load((CONFIGS / "solve_interval_1d.yaml").read_text())
    doc["decision"] = {"candidates": [[0.0]]}
    assert run("solve", "--config", write(tmp_path, "c.yaml", doc)) == 3


def test_verify_quick_passes_and_corruption_fails(capsys):
    assert run("verify", "--seed", 0, "--scale", 0.02) == 0
    assert run("verify", "--seed", 0, "--scale", 0.02, "--corrupt-tolerance") != 0
    assert "FAIL" in capsys.readouterr().out


def test_verify_budget_is_computation_error(tmp_path, capsys):
    iv = {"interval": [1, 2]}
    doc = {"mode": "verify",
           "problem": {"u": [iv] * 3, "y": [[iv] * 3] * 2, "z": [{"interval": [4, 6]}] * 2, "x_bounds": [[0, 1]] * 3},
           "decision": {"candidates": [[0.5, 0.5, 0.5], [0.2, 0.1, 0.3]]}}
    assert run("verify", "--seed", 0, "--config", write(tmp_path, "v.yaml", doc), "--scale", 0.01) == 3
    assert "budget" in capsys.readouterr().err


def test_experiment_outputs(tmp_path):
    doc = yaml.safe_load((CONFIGS / "experiment_robustness.yaml").read_text())
    doc["task"]["test_size"] = 4
    cfg = write(tmp_path, "e.yaml", doc)
    assert run("experiment", "--config", cfg, "--out", tmp_path / "a") == 0
    assert run("experiment", "--config", cfg, "--out", tmp_path / "b") == 0
    for name in ("summary.yaml", "regret.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    raw = (tmp_path / "a" / "regret.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "instance,method,status,regret,vacuous,x0,x1"
    assert len(lines) == 1 + 4 * 4
    summary = yaml.safe_load((tmp_path / "a" / "summary.yaml").read_text())
    assert [m["name"] for m in summary["methods"]] == ["point", "interval(coverage=1.0)",
                                                       "contamination(epsilon=0.2)", "pbox(ks_alpha=0.05)"]
    assert sorted(os.listdir(tmp_path / "a")) == ["regret.csv", "summary.yaml"]


def test_noiseless_summary_within_grid_bound(tmp_path):
    doc = yaml.safe_load((CONFIGS / "experiment_robustness.yaml").read_text())
    doc["task"].update(noise_scale=0.0, test_size=10)
    doc["methods"] = ["point"]
    assert run("experiment", "--config", write(tmp_path, "e.yaml", doc), "--out", tmp_path / "o") == 0
    summary = yaml.safe_load((tmp_path / "o" / "summary.yaml").read_text())
    assert summary["methods"][0]["mean_regret"] <= summary["grid_regret_bound"]


def test_atomic_write_leaves_old_file_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "out.txt"
    target.write_text("old")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        cli.atomic_write(str(target), "new")
    assert target.read_text() == "old"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_console_entry_point(tmp_path):
    out = tmp_path / "o.yaml"
    proc = subprocess.run([sys.executable, "-m", "credal_lp", "solve", "--config",
                           str(CONFIGS / "solve_interval_1d.yaml"), "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and out.exists()
    proc = subprocess.run([sys.executable, "-m", "credal_lp", "solve", "--config", str(tmp_path / "nope.yaml")],
                          capture_output=True, text=True)
    assert proc.returncode == 2
