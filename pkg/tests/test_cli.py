import json
import subprocess
import sys

import pytest

from maofdm.cli import main, run_checks
from maofdm.harness import load_records


def write_conf(tmp_path, text):
    p = tmp_path / "conf.toml"
    p.write_text(text)
    return str(p)


def test_run_and_cdf(tmp_path, capsys):
    conf = write_conf(tmp_path, 'schemes = "fpa,as,upper_bound"\ni_max = 3\n')
    out = tmp_path / "res.csv"
    assert main(["run", conf, "--realizations", "4", "--seed", "2", "--out", str(out)]) == 0
    recs = load_records(out)
    assert len(recs) == 12 and {r.scheme for r in recs} == {"fpa", "as", "upper_bound"}
    assert main(["cdf", str(out), "--threshold", "8", "--threshold", "100"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "sweep_value,scheme,threshold,cdf,n"
    assert len(lines) == 1 + 3 * 2
    assert lines[-1].endswith(",100.0,1.0,4")


def test_sweep_json_with_overrides(tmp_path, capsys):
    rc = main(["sweep", "--set", "schemes=fpa", "--set", "sweep_param=L",
               "--set", "sweep_values=1,2", "--realizations", "2", "--format", "json"])
    assert rc == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["sweep_value"] for r in rows] == [1.0, 1.0, 2.0, 2.0]


def test_run_refuses_sweep_and_sweep_needs_param(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["run", "--set", "sweep_param=L", "--set", "sweep_values=1"])
    assert e.value.code == 2
    with pytest.raises(SystemExit):
        main(["sweep", "--set", "schemes=fpa"])
    with pytest.raises(SystemExit):
        main(["run", "--set", "nonsense=1"])


def test_full_scale_flag(monkeypatch):
    import maofdm.cli as cli

    seen = {}

    def fake(spec, workers=1, progress=False):
        seen["n"] = spec.n_realizations
        return []

    monkeypatch.setattr(cli.harness, "run_experiment", fake)
    main(["run", "--full-scale", "--set", "schemes=fpa"])
    assert seen["n"] == 10_000


def test_map(tmp_path, capsys):
    assert main(["map", "--resolution", "3", "--set", "rx_half_width=1"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "x,y,rate_bps_hz,cir_power_norm" and len(lines) == 10


def test_check_report(tmp_path):
    out = tmp_path / "check.json"
    assert main(["check", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"]
    assert sum(e["within_delta"] for e in rep["phase_synthesis"]) >= 9
    assert rep["rational_dependence"]["relation"] is None
    assert [d["M"] for d in rep["equal_gain_dominance"]] == [2, 4, 8]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "maofdm", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "sweep" in res.stdout
