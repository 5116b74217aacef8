import json
import subprocess
import sys

import pytest

from fgbandit.cli import main
from fgbandit.graph import GraphSpec, generate, save_graph
from fgbandit.env import Instance, save_instance


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_from_files(tmp_path, capsys):
    save_graph(generate(GraphSpec("star", {"k": 5})), tmp_path / "g.json")
    save_instance(Instance.from_gaps([0.1, 0.1, 0.1, 0.1, 0.0], best=0.9), tmp_path / "i.json")
    code, out, _ = run(["analyze", "--graph", str(tmp_path / "g.json"), "--instance", str(tmp_path / "i.json")], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["c_star"] == pytest.approx(10.0)
    assert report["d_profile"][0] is None


def test_analyze_paper_instance(capsys):
    code, out, _ = run(["analyze", "--instance", "paper:cube_env_A:n=2,optimal_arm=0", "--clip-gaps"], capsys)
    assert code == 0
    assert json.loads(out)["c_star"] > 0


def test_simulate_writes_csv_and_json(tmp_path, capsys):
    prefix = tmp_path / "run"
    code, out, _ = run(
        ["simulate", "--graph", "star:k=4", "--instance", "0.5,0.6,0.5,0.5", "--algo", "ucbn", "--T", "500",
         "--replicates", "2", "--seed", "3", "--out", str(prefix), "--chart", str(tmp_path / "chart.json")],
        capsys,
    )
    assert code == 0
    header = (tmp_path / "run.csv").read_text().splitlines()[0]
    assert header == "t,regret_mean,regret_std,algo,scenario,replicates,master_seed"
    assert json.loads((tmp_path / "run.json").read_text())["replicates"] == 2
    assert json.loads((tmp_path / "chart.json").read_text())["x"]["field"] == "t"


def test_simulate_config_file_with_override(tmp_path, capsys):
    cfg = {"graph": "bandit:k=2", "instance": "0.5,0.75", "algo": "phased_lp", "T": 400, "replicates": 1}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    code, _, _ = run(
        ["simulate", "--config", str(tmp_path / "cfg.json"), "--T", "300", "--format", "csv", "--out", str(tmp_path / "x")],
        capsys,
    )
    assert code == 0
    assert (tmp_path / "x.csv").read_text().splitlines()[-1].startswith("300,")


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--graph", "star:k=4", "--instance", "0.5,0.6", "--T", "10"],
        ["simulate", "--graph", "nonsense:k=4", "--instance", "0.5", "--T", "10"],
        ["simulate", "--graph", "star:k=2", "--instance", "0.5,0.6", "--T", "0"],
        ["simulate", "--graph", "star:k=2", "--instance", "0.5,0.6", "--profile", "paper", "--alpha", "1"],
        ["analyze", "--graph", "star:k=2"],
        ["scenario", "nope"],
    ],
)
def test_config_errors_exit_2(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err.startswith("error:")


def test_unknown_config_key(tmp_path, capsys):
    (tmp_path / "cfg.json").write_text(json.dumps({"graph": "bandit:k=2", "speed": 3}))
    code, _, err = run(["simulate", "--config", str(tmp_path / "cfg.json")], capsys)
    assert code == 2 and "speed" in err


def test_lp_subcommand(tmp_path, capsys):
    (tmp_path / "lp.json").write_text(json.dumps({"costs": [1, 1], "rows": [[0], [1]], "thresholds": [2, 3]}))
    code, out, _ = run(["lp", str(tmp_path / "lp.json")], capsys)
    assert code == 0
    cert = json.loads(out)
    assert cert["value"] == 5.0 and cert["certified_gap"] == 0.0
    (tmp_path / "bad.json").write_text(json.dumps({"costs": [1], "rows": [[3]], "thresholds": [1]}))
    assert run(["lp", str(tmp_path / "bad.json")], capsys)[0] == 2


def test_runtime_error_exit_3(tmp_path, capsys):
    # output directory does not exist
    code, _, err = run(
        ["simulate", "--graph", "bandit:k=2", "--instance", "0.5,0.6", "--T", "10",
         "--out", str(tmp_path / "missing" / "r")],
        capsys,
    )
    assert code == 3 and err.startswith("runtime error:")


def test_scenario_subcommand(capsys):
    code, out, _ = run(["scenario", "cube", "T=2000", "replicates=1"], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["table"]["A-EnvA"] == pytest.approx(100 / 3)


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fgbandit.cli", "lp", str(tmp_path / "absent.json")], capture_output=True, text=True
    )
    assert proc.returncode == 2
