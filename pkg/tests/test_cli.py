import json

import pytest

from phasegraph.harness import cli, criteria
from phasegraph.estimators import Verdict


def test_simulate_flags_override_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model = ba\nsteps = 5000\nreplicas = 4\nseed = 1\n")
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", str(cfg), "--steps", "800", "--replicas", "2",
                     "--out-dir", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["steps"] == 800 and summary["config"]["replicas"] == 2
    assert (out / "degree.csv").exists() and (out / "timing.json").exists()


def test_simulate_config_errors(tmp_path, capsys):
    assert cli.main(["simulate", "--model", "hardcopy", "--backend", "histogram", "--steps", "5"]) == 2
    assert "hardcopy requires vertex backend" in capsys.readouterr().err
    bad = tmp_path / "bad.cfg"
    bad.write_text("model=ba\nsteps=10\nmu=-1\n")
    assert cli.main(["simulate", "--config", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_solve(tmp_path, capsys):
    out = tmp_path / "s"
    assert cli.main(["solve", "--model", "ba", "--k-max", "30", "--out-dir", str(out)]) == 0
    assert "beta = 3" in capsys.readouterr().out
    lines = (out / "solve.csv").read_text().splitlines()
    assert lines[0] == "k,d_lower,d_upper,d_plugin" and len(lines) == 32


def test_verify_exit_codes(tmp_path, monkeypatch, capsys):
    assert cli.main(["verify", "--criteria", "1", "--out-dir", str(tmp_path / "v")]) == 0
    report = json.loads((tmp_path / "v" / "report.json").read_text())
    row = report["criteria"][0]["verdicts"][0]
    assert {"anchor", "measured", "target", "tolerance", "pass"} <= set(row)

    def failing(ctx):
        return [Verdict("x", "deliberately wrong", 3.0, 4.0, 0.3, False)]

    monkeypatch.setitem(criteria.CRITERIA, 99, ("broken", failing))
    assert cli.main(["verify", "--criteria", "99", "--out-dir", str(tmp_path / "w")]) == 1
    assert "criterion 99 FAIL" in capsys.readouterr().out
    assert cli.main(["verify", "--criteria", "123"]) == 2


def test_verify_empty_selection(tmp_path):
    report, ok = criteria.verify([])
    assert ok and report["criteria"] == []


def test_every_verdict_has_anchor():
    report, _ = criteria.verify([1])
    for c in report["criteria"]:
        for v in c["verdicts"]:
            assert v["anchor"]


def test_report_merges(tmp_path, capsys):
    sim = tmp_path / "sim"
    cli.main(["simulate", "--model", "ba", "--steps", "500", "--out-dir", str(sim)])
    ver = tmp_path / "ver"
    cli.main(["verify", "--criteria", "1", "--out-dir", str(ver)])
    rep = tmp_path / "rep"
    assert cli.main(["report", str(sim), str(ver), "--out-dir", str(rep)]) == 0
    merged = json.loads((rep / "merged.json").read_text())
    assert len(merged) == 2
    md = (rep / "merged.md").read_text()
    assert "| 1 | pass |" in md
    assert cli.main(["report", str(tmp_path / "nothing"), "--out-dir", str(rep)]) == 2


def test_module_entry_point():
    import subprocess
    import sys

    r = subprocess.run([sys.executable, "-m", "phasegraph", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "simulate" in r.stdout
