import csv
import json
import subprocess
import sys

import pytest

from picklab.cli import main
from picklab.instance import illustrative_instance, read_instance, write_instance


def run(*args):
    return main([str(a) for a in args])


def test_generate_and_solve(tmp_path, capsys):
    inst = tmp_path / "inst.json"
    assert run("generate", "--setting", "Base", "--n", 4, "--seed", 7, "--system", "pcart", "--out", inst) == 0
    assert read_instance(inst).n == 4
    capsys.readouterr()
    assert run("solve", "--in", inst, "--system", "pcart") == 0
    out = json.loads(capsys.readouterr().out)
    assert {"objective_ticks", "batches", "routes"} <= set(out)


def test_illustrative_through_cli(tmp_path, capsys):
    p = tmp_path / "ill.json"
    write_instance(illustrative_instance(), p)
    expected = {"pcart-n": 100, "pcart": 90, "robot": 54}
    for kind, value in expected.items():
        trace = tmp_path / f"{kind}.json"
        assert run("simulate", "--in", p, "--system", kind, "--trace", trace) == 0
        assert json.loads(capsys.readouterr().out)["objective_ticks"] == value
        events = json.loads(trace.read_text())["events"]
        assert all(isinstance(e["t"], int) for e in events)
    assert run("solve", "--in", p, "--system", "robot") == 0
    assert json.loads(capsys.readouterr().out)["objective_ticks"] == 52


def test_audit(tmp_path, capsys):
    p = tmp_path / "ill.json"
    write_instance(illustrative_instance(), p)
    assert run("audit", "--in", p, "--system", "pcart") == 0
    rep = json.loads(capsys.readouterr().out)
    assert all(rep["checks"].values())


def test_generate_adversarial(tmp_path, capsys):
    p = tmp_path / "adv.json"
    assert run("generate-adversarial", "--family", "pcart-oscillation", "--k", 5, "--out", p) == 0
    pred = read_instance(p).provenance["predicted"]
    assert run("simulate", "--in", p) == 0          # system taken from the instance
    assert json.loads(capsys.readouterr().out)["objective_ticks"] == pred["reopt"]


def test_experiment(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text('settings = ["Base"]\nn_values = [3]\nseeds = 2\nsystems = ["pcart"]\n')
    out, rep = tmp_path / "r.csv", tmp_path / "r.md"
    assert run("experiment", "--config", cfg, "--out", out, "--report", rep) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["setting", "system", "n", "seed", "reopt_ticks", "ciopt_ticks", "ratio", "status"]
    assert len(rows) == 3 and rep.read_text().startswith("# ")


def test_bad_instance_reports_path(tmp_path, capsys):
    p = tmp_path / "bad.json"
    d = illustrative_instance().to_dict()
    d["arrivals_ticks"] = [5, 1, 2, 3]
    p.write_text(json.dumps(d))
    assert run("solve", "--in", p, "--system", "pcart") == 2
    assert "arrivals" in capsys.readouterr().err


def test_missing_system(tmp_path):
    p = tmp_path / "ill.json"
    write_instance(illustrative_instance(), p)
    with pytest.raises(SystemExit):
        run("solve", "--in", p)


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "picklab.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("generate", "generate-adversarial", "solve", "simulate", "audit", "experiment"):
        assert cmd in res.stdout
