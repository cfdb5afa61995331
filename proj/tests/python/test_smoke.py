import json
import os
import subprocess

import pytest

import batchlab


@pytest.fixture(scope="module")
def day():
    return batchlab.generate_synthetic(days=1, seed=3)


def test_generate_counts(day):
    assert len(day) == 330
    assert sum(s.priority == batchlab.Priority.vital for s in day) == 5
    assert all(s.arrival == s.registration + s.transport for s in day)


def test_simulate_and_report(day):
    records = batchlab.simulate(day, policy="threshold")
    assert len(records) == len(day)
    by_id = {s.id: s for s in day}
    for r in records:
        assert r.batch_start >= by_id[r.sample_id].arrival
        assert r.completion == r.batch_start + 900 + by_id[r.sample_id].processing
    rep = batchlab.report(records, day, "threshold")
    assert rep["label"] == "threshold"
    assert json.dumps(rep)


def test_deterministic(day):
    a = [(r.sample_id, r.completion) for r in batchlab.simulate(day, policy="fixed")]
    b = [(r.sample_id, r.completion) for r in batchlab.simulate(day, policy="fixed")]
    assert a == b


def test_offline_not_worse_for_vitals(day):
    vitals = [s for s in day if s.priority == batchlab.Priority.vital]
    off = {r.sample_id: r.completion for r in batchlab.solve_offline(day)}
    on = {r.sample_id: r.completion for r in batchlab.simulate(day, policy="lookahead")}
    assert sum(off[s.id] for s in vitals) <= sum(on[s.id] for s in vitals)


def test_errors():
    with pytest.raises(batchlab.Error):
        batchlab.Sample(1, 0, 0, "A", batchlab.Priority.vital, 600)
    with pytest.raises(batchlab.Error, match="lookahead"):
        batchlab.simulate([], policy="greedy")
    code, _, err = batchlab.run_cli(["simulate", "--policy", "x"])
    assert code == 2
    assert json.loads(err)["exit_code"] == 2


def test_instance_round_trip(tmp_path, day):
    path = str(tmp_path / "i.csv")
    batchlab.write_instance(day, path)
    assert batchlab.read_instance(path) == day


@pytest.mark.skipif("BATCHLAB_CLI" not in os.environ, reason="CLI binary path not given")
def test_cli_binary(tmp_path):
    cli = os.environ["BATCHLAB_CLI"]
    out = subprocess.run([cli, "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "datagen" in out.stdout
    bad = subprocess.run([cli, "simulate", "--instance", "missing.csv", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert bad.returncode == 2
    assert json.loads(bad.stderr)["error"]
