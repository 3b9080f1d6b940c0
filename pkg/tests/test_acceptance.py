"""Acceptance criteria 1-10, one test each; a PASS/FAIL line per criterion is
printed in the terminal summary."""

import os
import time
from pathlib import Path

import pytest
import yaml

from credal_lp import cli, verify
from credal_lp.harness import IntervalBand, PointOnly, run_experiment

from .conftest import ACCEPTANCE

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
SEED = 0

# first verified run of configs/experiment_robustness.yaml (point vs interval(coverage=1.0))
ANCHOR = {"point": 45.82468084013018, "interval(coverage=1.0)": 34.894371647038795}


def record(number: int, title: str, ok: bool, detail: str):
    ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}")
    print(ACCEPTANCE[-1])


def property_criterion(number, title, result, budget_s):
    ok = result.passed and result.seconds < budget_s
    record(number, title, ok, f"{result.cases} cases, max deviation {result.max_deviation:.3e}, "
                              f"{result.seconds:.1f}s (limit {budget_s}s){' ' + result.detail if result.detail else ''}")
    assert result.passed, result.detail
    assert result.seconds < budget_s


def test_criterion_01_conjugacy_sandwich():
    property_criterion(1, "conjugacy & sandwich", verify.check_conjugacy_sandwich(SEED, 500), 60)


def test_criterion_02_precise_collapse():
    property_criterion(2, "precise collapse", verify.check_precise_collapse(SEED, 100), 10)


def test_criterion_03_contamination_closed_form():
    property_criterion(3, "contamination closed form", verify.check_contamination_closed_form(SEED, 200), 60)


def test_criterion_04_pbox_refinement():
    property_criterion(4, "p-box refinement", verify.check_pbox_refinement(SEED, 20), 30)


def test_criterion_05_robust_counterpart():
    property_criterion(5, "robust-counterpart equivalence", verify.check_robust_counterpart(SEED, 100), 60)


@pytest.fixture(scope="module")
def agreement():
    return verify.check_decision_agreement(SEED, 100)


@pytest.mark.slow
def test_criterion_06_decision_oracle_agreement(agreement):
    property_criterion(6, "decision-set oracle agreement", agreement[0], 300)


@pytest.mark.slow
def test_criterion_07_maximin_within_maximal(agreement):
    property_criterion(7, "maximin within maximal", agreement[1], 300)


def test_criterion_08_punishment_irrelevance():
    property_criterion(8, "punishment irrelevance", verify.check_punishment_irrelevance(SEED, 50), 60)


def test_criterion_09_experiment_determinism_and_direction():
    t0 = time.perf_counter()
    cfg = cli.load_config(str(CONFIGS / "experiment_robustness.yaml"))
    spec = cfg.task.spec(cfg.seed)
    methods = [PointOnly(), IntervalBand(1.0)]
    a = run_experiment(spec, methods, "maximin")
    b = run_experiment(spec, methods, "maximin")
    identical = a.to_csv() == b.to_csv() and cli.dump_yaml(a.to_dict()) == cli.dump_yaml(b.to_dict())
    point, band = a.summary("point"), a.summary("interval(coverage=1.0)")
    direction = band.worst_case_regret <= point.worst_case_regret
    anchored = all(a.summary(k).worst_case_regret == pytest.approx(v, rel=1e-9) for k, v in ANCHOR.items())
    complete = a.instance_count >= 50 and point.errors == 0 and band.errors == 0
    elapsed = time.perf_counter() - t0
    ok = identical and direction and anchored and complete and elapsed < 300
    record(9, "experiment determinism & robustness direction", ok,
           f"{a.instance_count} instances, worst-case regret interval {band.worst_case_regret:.6f} <= "
           f"point {point.worst_case_regret:.6f}: {direction}; byte-identical: {identical}; "
           f"anchor: {anchored}; {elapsed:.1f}s")
    assert identical and direction and anchored and complete and elapsed < 300


def test_criterion_10_cli_contract(tmp_path, capsys):
    t0 = time.perf_counter()
    checks = {}
    # round trip
    cfgs = [cli.load_config(str(p)) for p in sorted(CONFIGS.glob("*.yaml"))]
    checks["round-trip"] = all(cli.parse_config(yaml.safe_load(cli.config_to_yaml(c))) == c for c in cfgs)
    # exit codes
    out1, out2 = tmp_path / "a.yaml", tmp_path / "b.yaml"
    rc0 = cli.main(["solve", "--config", str(CONFIGS / "solve_interval_1d.yaml"), "--out", str(out1)])
    cli.main(["solve", "--config", str(CONFIGS / "solve_interval_1d.yaml"), "--out", str(out2)])
    bad = yaml.safe_load((CONFIGS / "solve_interval_1d.yaml").read_text())
    bad["problem"]["z"][0] = {"interval": [6, 4]}
    (tmp_path / "bad.yaml").write_text(yaml.safe_dump(bad))
    rc2 = cli.main(["solve", "--config", str(tmp_path / "bad.yaml")])
    bad["problem"]["z"][0] = {"interval": [4, 6]}
    bad["decision"] = {"candidates": [[0.0]]}
    (tmp_path / "empty.yaml").write_text(yaml.safe_dump(bad))
    rc3 = cli.main(["solve", "--config", str(tmp_path / "empty.yaml")])
    checks["exit codes 0/2/3"] = (rc0, rc2, rc3) == (0, 2, 3)
    # atomic output: only the target exists, no temp residue
    checks["atomic output"] = sorted(os.listdir(tmp_path)) == ["a.yaml", "b.yaml", "bad.yaml", "empty.yaml"]
    checks["byte-determinism"] = out1.read_bytes() == out2.read_bytes()
    capsys.readouterr()
    elapsed = time.perf_counter() - t0
    ok = all(checks.values()) and elapsed < 10
    record(10, "CLI contract", ok, ", ".join(f"{k}: {v}" for k, v in checks.items()) + f"; {elapsed:.1f}s")
    assert all(checks.values()), checks
    assert elapsed < 10
