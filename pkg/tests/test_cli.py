import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from flowcube import kernels
from flowcube.cli import RunConfig, dispatch
from flowcube.embedding import EmbeddingConfig, full_embed
from flowcube.flows import get_flow
from flowcube.funcspace import SampledFunction, bernstein_metric

EMBED_ARGS = ["--levels", "3", "--window", "60", "--step", "0.015625", "--tail", "15"]


def run(capsys, *argv):
    code = dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_kernel(tmp_path, capsys):
    path = tmp_path / "phi.csv"
    code, out, _ = run(capsys, "kernel", "--n", "2", "--window", "10", "--emit", str(path))
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["x", "phi_2(x)"]
    assert len(rows) - 1 == 2 * 10 * 16 + 1
    x, y = float(rows[161][0]), float(rows[161][1])
    assert x == 0.0 and y == 2.0
    side = json.loads(path.with_suffix(".json").read_text())
    assert side["tail_bound"] == kernels.tail_bound(2, 10)
    assert side["config"]["command"] == "kernel" and "seed" in side["config"]
    assert out["mass"] == side["mass"]


def test_flow(capsys):
    code, out, _ = run(capsys, "flow", "--name", "torus", "--state", "0,0", "--t", "1")
    assert code == 0
    np.testing.assert_allclose(out["evolved"], [0.0, np.sqrt(2) - 1], atol=1e-15)
    assert len(out["coordinates"]) == 4
    assert out["config"]["params"]["name"] == "torus"


def test_flow_bad_state(capsys):
    code, _, err = run(capsys, "flow", "--name", "torus", "--state", "0,0,0", "--t", "1")
    assert code == 2 and "state" in err


def test_usage_errors(capsys):
    code, _, err = run(capsys, "embed", "--state", "0,0", "--out", "x")
    assert code == 2 and "--flow" in err and "usage" in err
    code, _, err = run(capsys, "kernel", "--n", "1", "--emit", "a.csv", "--bogus")
    assert code == 2 and "usage" in err
    assert run(capsys)[0] == 2


def test_metric_same_file(tmp_path, capsys):
    f = SampledFunction.from_callable(lambda t: np.cos(t), -45, 45, 0.05, "symmetric_unit")
    f.save(tmp_path / "a.json")
    a = str(tmp_path / "a.json")
    code, out, _ = run(capsys, "metric", "--kind", "bernstein", "--f", a, "--g", a, "--depth", "40")
    assert code == 0 and out["value"] == 0
    assert out["error_bound"] == 2 * 2.0**-40


def test_metric_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "metric", "--kind", "bebutov", "--f", str(tmp_path / "no.json"),
                       "--g", str(tmp_path / "no.json"))
    assert code == 2


def test_embed_round_trip(tmp_path, capsys):
    outs = []
    for k, state in enumerate(("0.1,0.2", "0.15,0.2")):
        out = tmp_path / f"e{k}"
        code, summary, _ = run(capsys, "embed", "--flow", "torus", "--state", state, *EMBED_ARGS,
                               "--out", str(out))
        assert code == 0 and summary["components"] == 6
        outs.append(out)
    manifest = json.loads((outs[0] / "manifest.json").read_text())
    assert manifest["config"]["params"]["flow"] == "torus"
    assert len(manifest["files"]) == len(manifest["components"]) == 6

    f, g = outs[0] / "level02_comp01.json", outs[1] / "level02_comp01.json"
    code, res, _ = run(capsys, "metric", "--kind", "bernstein", "--f", str(f), "--g", str(g))
    cfg = EmbeddingConfig(L=3, W=60.0, h=0.015625, A=15.0)
    flow = get_flow("torus")
    Ea = full_embed(flow, [0.1, 0.2], cfg)
    Eb = full_embed(flow, [0.15, 0.2], cfg)
    value, err = bernstein_metric(Ea.component(2, 1), Eb.component(2, 1))
    assert code == 0
    assert res["value"] == value and res["error_bound"] == err


def test_config_replay(tmp_path, capsys):
    out = tmp_path / "first"
    run(capsys, "embed", "--flow", "fixed-circle", "--state", "0.1,0.4", *EMBED_ARGS, "--out", str(out))
    saved = json.loads((out / "manifest.json").read_text())["config"]
    replay = RunConfig.from_dict(saved)
    replay.params["out"] = str(tmp_path / "second")
    assert dispatch(replay.argv()) == 0
    capsys.readouterr()
    a = (out / "level03_comp02.json").read_text()
    b = (tmp_path / "second" / "level03_comp02.json").read_text()
    assert json.loads(a)["values"] == json.loads(b)["values"]


def test_verify_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"kernels": {"n": [1], "W": 100.0}}))
    report = tmp_path / "report.json"
    code, out, err = run(capsys, "verify", "--suite", "kernels", "--config", str(good),
                         "--out", str(report))
    assert code == 0 and out["all_pass"]
    doc = json.loads(report.read_text())
    assert doc["seed"] == doc["config"]["seed"]
    assert all(r["pass"] for r in doc["reports"])
    assert "PASS kernel.mass[n=1]" in err

    bad = tmp_path / "bad.json"
    # An unreachable threshold must fail, not be loosened.
    bad.write_text(json.dumps({"summability": {"n": [4, 8], "threshold": 1e-6, "A": 20.0}}))
    code, out, _ = run(capsys, "verify", "--suite", "summability", "--config", str(bad))
    assert code == 1 and out["failed"] == ["summability[abs_sin,n=8]"]


def test_seed_env_echo(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("FLOWCUBE_SEED", "123")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"kernels": {"n": [1], "W": 50.0}}))
    report = tmp_path / "r.json"
    run(capsys, "verify", "--suite", "kernels", "--config", str(cfg), "--out", str(report))
    assert json.loads(report.read_text())["seed"] == 123


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "flowcube", "--version"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "flowcube" in proc.stdout


def test_verify_all_defaults(tmp_path, capsys):
    report = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--suite", "all", "--out", str(report))
    doc = json.loads(report.read_text())
    assert code == 0 and out["all_pass"]
    names = [r["check_name"] for r in doc["reports"]]
    assert names == sorted(names) and len(names) == 20 + 5 + 3 + 2 + 9
    assert all(r["pass"] for r in doc["reports"])
