import csv
import json

import numpy as np
import pytest

from mbk import load_trace
from mbk.cli import main, parse_config_file
from mbk.errors import ContractViolation

GEN = "uniform:n=60,d=2,seed=1"


def run_cli(*argv):
    return main(list(argv))


def test_no_command_prints_help(capsys):
    assert run_cli() == 2
    assert "usage" in capsys.readouterr().out.lower()


def test_gen_writes_parseable_csv(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run_cli("gen", "--gen", "uniform:n=30,d=3", "--seed", "4", "--out", "pts.csv") == 0
    rows = [line.split(",") for line in (tmp_path / "pts.csv").read_text().splitlines()]
    X = np.asarray(rows, dtype=np.float64)
    assert X.shape == (30, 3)
    assert X.min() >= 0.0 and X.max() <= 1.0


def test_gen_seed_flag_applies_when_spec_omits_it(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    run_cli("gen", "--gen", "uniform:n=10,d=2", "--seed", "1", "--out", "a.csv")
    run_cli("gen", "--gen", "uniform:n=10,d=2", "--seed", "2", "--out", "b.csv")
    run_cli("gen", "--gen", "uniform:n=10,d=2", "--seed", "1", "--out", "c.csv")
    a, b, c = [(tmp_path / f).read_text() for f in ("a.csv", "b.csv", "c.csv")]
    assert a != b
    assert a == c


def test_run_grid_produces_traces_and_metrics(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code = run_cli(
        "run",
        "--gen", GEN,
        "--k", "2",
        "--b", "12",
        "--eps", "0.2,0.1",
        "--trials", "2",
        "--seed", "5",
        "--out-dir", "out",
    )
    assert code == 0
    traces = sorted((tmp_path / "out").glob("trace_*.json"))
    assert len(traces) == 4  # 1 k x 1 b x 2 eps x 2 trials
    with open(tmp_path / "out" / "metrics.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert rows[0]["k"] == "2" and rows[0]["b"] == "12"
    assert {r["eps"] for r in rows} == {"0.2", "0.1"}
    assert all(r["reason"] in ("stop_rule_fired", "cap_reached") for r in rows)
    assert all(float(r["final_cost"]) >= 0.0 for r in rows)
    # audits were not requested: the columns exist but stay empty
    assert rows[0]["audit_global_pass"] == ""
    assert rows[0]["audit_proximity_pass"] == ""
    # rate="paper" always gets the implication audit, which must hold
    assert all(r["audit_implication_pass"] == "1" for r in rows)
    # per-run seeds are derived, not sequential
    assert len({r["seed"] for r in rows}) == 4


def test_sweep_is_an_alias(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run_cli("sweep", "--gen", GEN, "--k", "2", "--b", "8", "--eps", "0.3") == 0
    assert (tmp_path / "runs" / "trace_0000.json").exists()


def test_run_auto_batch_size_echoes_and_warns(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = run_cli("run", "--gen", "uniform:n=40,d=2,seed=2", "--k", "2", "--eps", "0.5")
    assert code == 0
    err = capsys.readouterr().err
    assert "warning" in err and "exceeds n" in err
    trace = load_trace(tmp_path / "runs" / "trace_0000.json")
    # ceil(16 * ln(40*2*2/0.5)) = 93, echoed into the run config
    assert trace.config.b == 93


def test_run_audit_flags_enable_recordings(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code = run_cli(
        "run",
        "--gen", GEN,
        "--k", "2",
        "--b", "30",
        "--eps", "0.3",
        "--audit-global",
        "--audit-proximity",
        "--out-dir", "audited",
    )
    assert code == 0
    trace = load_trace(tmp_path / "audited" / "trace_0000.json")
    assert trace.final_global_cost is not None
    assert all(r.cbar_dist is not None for r in trace.iterations)
    with open(tmp_path / "audited" / "metrics.csv") as fh:
        row = next(csv.DictReader(fh))
    assert row["audit_global_pass"] in ("0", "1")
    assert row["audit_proximity_pass"] in ("0", "1")


def test_run_reproducibility_across_thread_counts(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    args = ["run", "--gen", GEN, "--k", "2,3", "--b", "10", "--eps", "0.2", "--trials", "2", "--seed", "11"]
    monkeypatch.setenv("MBK_THREADS", "1")
    assert run_cli(*args, "--out-dir", "serial") == 0
    monkeypatch.setenv("MBK_THREADS", "4")
    assert run_cli(*args, "--out-dir", "threaded") == 0
    serial = sorted((tmp_path / "serial").glob("trace_*.json"))
    threaded = sorted((tmp_path / "threaded").glob("trace_*.json"))
    assert len(serial) == len(threaded) == 4  # 2 k values x 2 trials
    for a, b in zip(serial, threaded):
        assert a.read_bytes() == b.read_bytes()


def test_bad_thread_env_rejected(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("MBK_THREADS", "lots")
    assert run_cli("run", "--gen", GEN, "--k", "2", "--b", "8", "--eps", "0.3") == 2


def test_config_file_supplies_settings(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "# experiment settings\n"
        f"gen = {GEN}\n"
        "k = 2\n"
        "b = 10\n"
        "eps = 0.4\n"
        "out-dir = fromfile\n"
    )
    assert run_cli("run", "--config", str(cfg)) == 0
    trace = load_trace(tmp_path / "fromfile" / "trace_0000.json")
    assert trace.config.eps == 0.4
    assert trace.config.b == 10


def test_cli_flags_override_config_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"gen = {GEN}\nk = 2\nb = 10\neps = 0.4\n")
    assert run_cli("run", "--config", str(cfg), "--eps", "0.25", "--out-dir", "ovr") == 0
    trace = load_trace(tmp_path / "ovr" / "trace_0000.json")
    assert trace.config.eps == 0.25


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("sped = 3\n")
    with pytest.raises(ContractViolation):
        parse_config_file(cfg)
    cfg.write_text("just some words\n")
    with pytest.raises(ContractViolation):
        parse_config_file(cfg)


def test_audit_command_passes_on_healthy_traces(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    # a batch this large keeps the recorded run well inside the audited
    # guarantees, so every auto-selected check should hold
    run_cli(
        "run", "--gen", "uniform:n=2000,d=2,seed=1", "--k", "2", "--b", "1000",
        "--eps", "0.4", "--audit-global", "--audit-proximity", "--out-dir", "healthy",
    )
    capsys.readouterr()
    code = run_cli("audit", "healthy/trace_0000.json", "--out", "report.json")
    out = capsys.readouterr().out
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] is True
    names = {c["name"] for c in report["traces"][0]["checks"]}
    assert {"global_progress", "center_proximity", "sklearn_implication"} <= names
    assert "PASS" in out


def test_audit_fails_on_doctored_trace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    run_cli(
        "run", "--gen", GEN, "--k", "2", "--b", "30", "--eps", "0.3",
        "--audit-proximity", "--out-dir", "sick",
    )
    path = tmp_path / "sick" / "trace_0000.json"
    doc = json.loads(path.read_text())
    for rec in doc["iterations"]:
        rec["cbar_dist"] = [1.0] * len(rec["cbar_dist"])
    path.write_text(json.dumps(doc))
    assert run_cli("audit", str(path), "--proximity", "--out", "bad.json") == 1
    report = json.loads((tmp_path / "bad.json").read_text())
    assert report["passed"] is False


def test_audit_missing_recordings_is_a_contract_error(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    run_cli("run", "--gen", GEN, "--k", "2", "--b", "8", "--eps", "0.3", "--out-dir", "plain")
    assert run_cli("audit", "plain/trace_0000.json", "--proximity") == 2


def test_audit_concentration_mode(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = run_cli(
        "audit", "--concentration",
        "--gen", "uniform:n=1000,d=2,seed=3",
        "--k", "3", "--b", "200", "--delta", "0.1", "--trials", "100",
        "--out", "conc.json",
    )
    assert code == 0
    report = json.loads((tmp_path / "conc.json").read_text())
    assert report["concentration"]["total"] == 100


def test_audit_without_work_is_an_error(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run_cli("audit") == 2


@pytest.mark.parametrize(
    "argv",
    [
        ("run", "--gen", GEN, "--k", "2", "--b", "8", "--eps", "0.3", "--rate", "warp"),
        ("run", "--gen", GEN, "--eps", "0.3"),  # no k
        ("run", "--gen", GEN, "--k", "2"),  # no eps
        ("run", "--k", "2", "--eps", "0.3"),  # no dataset
        ("run", "--gen", GEN, "--data", "x.csv", "--k", "2", "--eps", "0.3"),  # both
        ("run", "--gen", "uniform:n=9,d=1", "--k", "2", "--b", "4", "--eps", "0.3", "--trials", "0"),
    ],
)
def test_usage_errors_exit_2(tmp_path, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    assert run_cli(*argv) == 2


def test_missing_data_file_exits_3(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run_cli("run", "--data", "absent.csv", "--k", "2", "--eps", "0.3") == 3


def test_oracle_check_passes(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert run_cli("oracle-check", "--seed", "3", "--instances", "20") == 0
    out = capsys.readouterr().out
    assert "OK" in out
