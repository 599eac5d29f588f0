import json
import os
import subprocess
import sys

import numpy as np
import pytest

import gufic.cli as cli
from gufic.cli import EXIT_AUDIT, EXIT_CONFIG, EXIT_OK, EXIT_SIM, main
from gufic.config import scenario_dir
from gufic.energy_audit import AuditReport
from gufic.simlog import COLUMNS, SimLog

CIRCLE = str(scenario_dir() / "circle.json")


def write_config(tmp_path, **changes):
    d = json.loads((scenario_dir() / "circle.json").read_text())
    d.update(changes)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(d, indent=2))
    return str(p)


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(["run", "--config", CIRCLE, "--duration", "0.5", "--out", str(out)]) == EXIT_OK
    return out


def test_run_writes_outputs(run_dir):
    assert (run_dir / "log.csv").exists()
    assert (run_dir / "audit.txt").read_text().count("PASS") == 1
    assert sorted(p.name for p in (run_dir / "plots").iterdir()) == \
        ["force.svg", "psi.svg", "tanks.svg", "tracking.svg"]
    assert (run_dir / "margins.csv").exists()


def test_audit_command_passes_on_clean_log(run_dir, capsys):
    assert main(["audit", "--log", str(run_dir / "log.csv")]) == EXIT_OK
    assert main(["audit", "--log", str(run_dir / "log.csv"), "--wrench", "Febar"]) in (EXIT_OK, EXIT_AUDIT)
    assert "filtered sensor wrench" in capsys.readouterr().out


def test_audit_command_flags_tampered_log(run_dir, tmp_path, capsys):
    log = SimLog.read_csv(run_dir / "log.csv")
    data = log.data.copy()
    data[300:, COLUMNS.index("storage")] += 0.05
    tampered = tmp_path / "tampered.csv"
    SimLog(data).write_csv(tampered)
    assert main(["audit", "--log", str(tampered), "--tol", "1e-3"]) == EXIT_AUDIT
    out = capsys.readouterr().out
    assert "FAIL" in out and f"first violation: t = {data[300, 0]:.6g}" in out


def test_audit_command_rejects_bad_log(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("# something else\nt\n0\n")
    assert main(["audit", "--log", str(bad)]) == EXIT_CONFIG
    missing = tmp_path / "missing.csv"
    SimLog(np.zeros((3, 2)), ["t", "storage"]).write_csv(missing)
    assert main(["audit", "--log", str(missing)]) == EXIT_CONFIG
    assert "no column" in capsys.readouterr().err


def test_validate_ok_and_missing_field(tmp_path, capsys):
    assert main(["validate", "--config", CIRCLE]) == EXIT_OK
    d = json.loads((scenario_dir() / "circle.json").read_text())
    del d["tanks"]["upper"]
    p = tmp_path / "no_upper.json"
    p.write_text(json.dumps(d, indent=2))
    assert main(["validate", "--config", str(p)]) == EXIT_CONFIG
    assert "tanks.upper" in capsys.readouterr().err


def test_missing_config_file_is_config_error(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG


def test_unreachable_start_is_simulation_error(tmp_path, capsys):
    d = json.loads((scenario_dir() / "circle.json").read_text())
    d["trajectory"]["center"] = [3.0, 0.0, 0.125]
    p = write_config(tmp_path, trajectory=d["trajectory"], duration=0.01)
    assert main(["run", "--config", p, "--out", str(tmp_path / "o")]) == EXIT_SIM
    assert "simulation error" in capsys.readouterr().err


def test_run_exits_3_when_gufic_audit_fails(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "passivity_audit",
                        lambda log_: AuditReport(False, 1e-3, -1.0, 0.1, 0.1, len(log_), margins=np.zeros(len(log_))))
    assert main(["run", "--config", CIRCLE, "--duration", "0.01", "--out", str(tmp_path)]) == EXIT_AUDIT
    # the baselines make no passivity claim, so their audit is informational
    assert main(["run", "--config", CIRCLE, "--controller", "gic", "--duration", "0.01",
                 "--out", str(tmp_path / "gic")]) == EXIT_OK


def test_compare_writes_both_runs(tmp_path, capsys):
    assert main(["compare", "--config", CIRCLE, "--duration", "0.3", "--out", str(tmp_path)]) == EXIT_OK
    for kind in ("gufic", "gic"):
        assert (tmp_path / kind / "log.csv").exists()
    assert (tmp_path / "plots" / "compare_force.svg").exists()
    out = capsys.readouterr().out
    assert "gufic:" in out and "gic:" in out


def test_module_entry_point_and_log_level(tmp_path):
    env = dict(os.environ, GUFIC_LOG_LEVEL="INFO")
    r = subprocess.run([sys.executable, "-m", "gufic", "run", "--config", CIRCLE, "--duration", "0.05",
                        "--out", str(tmp_path)], capture_output=True, text=True, env=env)
    assert r.returncode == 0
    assert "INFO gufic" in r.stderr
    env["GUFIC_LOG_LEVEL"] = "chatty"
    r = subprocess.run([sys.executable, "-m", "gufic", "validate", "--config", CIRCLE],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0 and "GUFIC_LOG_LEVEL" in r.stderr
