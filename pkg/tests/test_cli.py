import csv
import json
import os
import signal
import subprocess
import sys
import time
import urllib.request

import pytest

from privcharts.cli import main
from privcharts.data import to_csv
from privcharts.fixtures import adult_like, adult_like_charts, adult_like_selections


@pytest.fixture(scope="module")
def world(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    csv_path = root / "data.csv"
    csv_path.write_text(to_csv(adult_like(n=200)))
    charts = adult_like_charts()
    sels = adult_like_selections()
    config = {
        "input": str(csv_path),
        "epsilon": 2.0,
        "k": 1,
        "seed": 7,
        "charts": [charts["order"].to_json()],
        "patterns": [
            {"chart": charts["order"].id, "selection": sels["order"].to_json(), "weight": 4.0}
        ],
    }
    cfg_path = root / "config.json"
    cfg_path.write_text(json.dumps(config))
    return root, str(cfg_path), config


def test_synth_deterministic(world, tmp_path):
    root, cfg_path, _ = world
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["synth", "--config", cfg_path, "--out", str(out1)]) == 0
    assert main(["synth", "--config", cfg_path, "--out", str(out2)]) == 0
    assert (out1 / "synthetic.csv").read_text() == (out2 / "synthetic.csv").read_text()
    assert (out1 / "scheme.json").exists() and (out1 / "metrics.json").exists()


def test_synth_missing_epsilon_exit_1(world, tmp_path, capsys):
    root, _, config = world
    bad = dict(config)
    bad.pop("epsilon")
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    assert main(["synth", "--config", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "epsilon" in capsys.readouterr().err


def test_synth_missing_input_exit_2(world, tmp_path):
    root, _, config = world
    bad = dict(config)
    bad["input"] = str(tmp_path / "missing.csv")
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    assert main(["synth", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_baseline_equals_zero_weights(world, tmp_path):
    root, cfg_path, config = world
    zero_cfg = dict(config)
    zero_cfg["patterns"] = [dict(p, weight=0.0) for p in config["patterns"]]
    zero_path = tmp_path / "zero.json"
    zero_path.write_text(json.dumps(zero_cfg))
    out_base, out_zero = tmp_path / "base", tmp_path / "zero"
    assert main(["synth", "--config", cfg_path, "--baseline", "--out", str(out_base)]) == 0
    assert main(["synth", "--config", str(zero_path), "--out", str(out_zero)]) == 0
    assert (out_base / "synthetic.csv").read_bytes() == (out_zero / "synthetic.csv").read_bytes()


def test_sweep_conditions_and_aggregates(world, tmp_path):
    root, _, config = world
    sweep_cfg = dict(config)
    sweep_cfg["epsilons"] = [1.0, 2.0]
    sweep_cfg["weights"] = [0.0, 4.0]
    sweep_cfg["repeats"] = 3
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(sweep_cfg))
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(path), "--out", str(out)]) == 0
    with open(out / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    conditions = {(r["epsilon"], r["weight"]) for r in rows}
    assert len(conditions) == 4  # 2 epsilons x 2 weights
    assert all(int(r["n_runs"]) == 3 for r in rows)
    assert all(float(r["ci95"]) >= 0 for r in rows)


def test_sweep_seed_permutation_invariance(world, tmp_path):
    root, _, config = world
    base = dict(config, repeats=3, weights=[4.0])
    p1 = tmp_path / "s1.json"
    p1.write_text(json.dumps(base))
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["sweep", "--config", str(p1), "--out", str(out1)]) == 0
    assert main(["sweep", "--config", str(p1), "--out", str(out2), "--jobs", "2"]) == 0
    assert (out1 / "sweep.csv").read_text() == (out2 / "sweep.csv").read_text()


def test_serve_prints_bound_address_and_shuts_down(tmp_path):
    proc = subprocess.Popen(
        [sys.executable, "-m", "privcharts.cli", "serve", "--port", "0",
         "--state-dir", str(tmp_path / "state")],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    try:
        line = proc.stdout.readline()
        assert "serving on http://" in line
        url = line.strip().split()[-1]
        deadline = time.time() + 10
        status = None
        while time.time() < deadline:
            try:
                req = urllib.request.Request(url + "/sessions", method="POST")
                with urllib.request.urlopen(req, timeout=2) as resp:
                    status = resp.status
                    break
            except Exception:
                time.sleep(0.2)
        assert status == 201
    finally:
        proc.send_signal(signal.SIGINT)
        assert proc.wait(timeout=10) == 0


def test_serve_unusable_state_dir_exit_1(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("a file where a directory should go")
    result = subprocess.run(
        [sys.executable, "-m", "privcharts.cli", "serve", "--port", "0",
         "--state-dir", str(blocker / "sub")],
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert result.returncode == 1
    assert "state dir" in result.stderr
