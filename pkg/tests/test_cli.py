import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from axsr import cli
from axsr.cli import best_obss_pd, main, parse_seeds

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

FAST_TOY1 = (SCENARIOS / "toy1.ini").read_text().replace("duration = 10", "duration = 1.2\nwarmup = 0.2") \
    .replace("obss_pd_values = -82..-62", "obss_pd_values = -82,-75,-70").replace("seeds = 0..2", "seeds = 0,1")


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# manifest: manifest.json run_id=")
    return list(csv.DictReader(lines[1:]))


@pytest.fixture
def fast_toy1(tmp_path):
    p = tmp_path / "toy1_fast.ini"
    p.write_text(FAST_TOY1)
    return p


def test_parse_seeds():
    assert parse_seeds("0..3") == (0, 1, 2, 3)
    assert parse_seeds("4,2") == (4, 2)
    assert parse_seeds("7") == (7,)
    with pytest.raises(cli.InputError):
        parse_seeds("3..1")


def test_ctmn_toy1_rows(tmp_path):
    out = tmp_path / "out"
    assert main(["ctmn", "--scenario", str(SCENARIOS / "toy1.ini"), "--out", str(out), "--graphs"]) == 0
    rows = read_csv(out / "ctmn.csv")
    assert len(rows) == 42
    assert list(rows[0]) == ["obss_pd_non_srg", "obss_pd_srg", "bss", "throughput_mbps", "tx_pwr_dbm"]
    assert len(list((out / "graphs").glob("*.txt"))) == 21
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "ctmn" and "ctmn.csv" in manifest["outputs"]


def test_ctmn_legacy_point_equals_floor(tmp_path, fast_toy1):
    out = tmp_path / "o"
    main(["ctmn", "--scenario", str(fast_toy1), "--out", str(out)])
    rows = read_csv(out / "ctmn.csv")
    floor = [r["throughput_mbps"] for r in rows if r["obss_pd_non_srg"] == "-82"]
    assert floor[0] == floor[1]


def test_ctmn_toy2_joint_rows(tmp_path):
    text = (SCENARIOS / "toy2.ini").read_text()
    p = tmp_path / "t2.ini"
    p.write_text(text)
    out = tmp_path / "o"
    assert main(["ctmn", "--scenario", str(p), "--out", str(out)]) == 0
    assert len(read_csv(out / "ctmn.csv")) == 11 * 11 * 3


def test_sweep_outputs_and_json(tmp_path, fast_toy1):
    out = tmp_path / "o"
    assert main(["sweep", "--scenario", str(fast_toy1), "--out", str(out), "--seeds", "0..1"]) == 0
    rows = read_csv(out / "sweep_runs.csv")
    assert len(rows) == 2 * 3 * 2
    assert {"sr_enabled", "throughput_mbps", "occupancy", "delay_ms", "drops"} <= set(rows[0])
    best = read_csv(out / "sweep_best.csv")
    assert len(best) == 1
    out_json = tmp_path / "j"
    assert main(["sweep", "--scenario", str(fast_toy1), "--out", str(out_json), "--format", "json"]) == 0
    data = json.loads((out_json / "sweep_runs.json").read_text())
    assert data["manifest"].startswith("manifest.json run_id=") and len(data["rows"]) == 12


def test_sim_trace(tmp_path, fast_toy1):
    out = tmp_path / "o"
    assert main(["sim", "--scenario", str(fast_toy1), "--out", str(out), "--seeds", "3", "--trace"]) == 0
    traces = list((out / "traces").glob("*.csv"))
    assert len(traces) == 1
    body = traces[0].read_text().splitlines()
    assert body[1] == "time_us,node,event,detail" and len(body) > 10


def test_reruns_are_byte_identical(tmp_path, fast_toy1):
    a, b = tmp_path / "a", tmp_path / "b"
    for out, jobs in ((a, "1"), (b, "2")):
        assert main(["sweep", "--scenario", str(fast_toy1), "--out", str(out), "--jobs", jobs]) == 0
    for name in ("sweep_runs.csv", "sweep_summary.csv", "sweep_best.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_empty_sweep_is_an_input_error(tmp_path, fast_toy1):
    p = tmp_path / "empty.ini"
    p.write_text(FAST_TOY1.replace("obss_pd_values = -82,-75,-70", "obss_pd_values ="))
    assert main(["ctmn", "--scenario", str(p), "--out", str(tmp_path / "o")]) == 2
    assert main(["crossval", "--scenario", str(p), "--out", str(tmp_path / "o2")]) == 2
    assert not (tmp_path / "o2" / "crossval.csv").exists()


def test_bad_scenario_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text("[deployment]\nmap = 10,10\nbsses = A\nA.ap = 1,1\nA.sta = 2,2\nA.obss_pd_non_srg = -61\n")
    assert main(["sim", "--scenario", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "line" in capsys.readouterr().err
    assert main(["sim", "--scenario", str(tmp_path / "missing.ini"), "--out", str(tmp_path / "o")]) == 2


def test_internal_error_exit_code(tmp_path, fast_toy1, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("corrupt")
    monkeypatch.setattr(cli, "cmd_sim", boom)
    assert main(["sim", "--scenario", str(fast_toy1), "--out", str(tmp_path / "o")]) == 3


def test_validate_srps(tmp_path):
    out = tmp_path / "o"
    assert main(["validate-srps", str(SCENARIOS / "srps_example.json"), "--out", str(out)]) == 0
    row = read_csv(out / "srps.csv")[0]
    assert row["valid"] == "1" and (row["srg_min"], row["srg_max"]) == ("-78", "-68")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"non_srg_offset_present": True, "non_srg_obss_pd_max_offset": 21}))
    assert main(["validate-srps", str(bad), "--out", str(tmp_path / "b")]) == 2
    row = read_csv(tmp_path / "b" / "srps.csv")[0]
    assert row["valid"] == "0" and row["constraint"] == "constraint-4"
    bad.write_text(json.dumps({"mystery": 1}))
    assert main(["validate-srps", str(bad), "--out", str(tmp_path / "c")]) == 2


def test_best_obss_pd_ties_go_low():
    rows = []
    for pd, a in ((-82, 10.0), (-75, 20.0), (-70, 20.0)):
        for seed in (0, 1):
            base = {"map_size": 15, "load_mbps": 120, "n_agg": 64, "sr_mode": "only_A",
                    "obss_pd": pd, "obss_pd_srg": None, "seed": seed}
            rows.append({**base, "bss": "A", "throughput_mbps": a})
            rows.append({**base, "bss": "B", "throughput_mbps": 5.0})
    best = best_obss_pd(rows)
    assert len(best) == 1
    assert best[0]["best_obss_pd"] == -75
    assert best[0]["gain_a_mbps"] == pytest.approx(10.0)
    assert best[0]["gain_others_mbps"] == pytest.approx(0.0)


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "axsr.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("ctmn", "sim", "sweep", "crossval", "validate-srps"):
        assert sub in res.stdout
    res = subprocess.run([sys.executable, "-m", "axsr.cli", "sim"], capture_output=True, text=True)
    assert res.returncode == 2


def test_crossval_single_bss_agrees(tmp_path):
    from dataclasses import replace
    from axsr.cli import crossval
    from axsr.scenario import Deployment, SweepSpec, toy_setup
    sc = toy_setup(1)
    sc = replace(sc, deployment=Deployment(sc.deployment.bsses[:1], 10, 10), configs=sc.configs[:1],
                 sweep=SweepSpec(obss_pd_values=(-82.0,), sr_mode="legacy", duration=5.0, warmup=0.5))
    points, summary = crossval(sc, seeds=(0,))
    assert summary[0]["mae_mbps"] < 0.01 * points[0]["ctmn_mbps"]
