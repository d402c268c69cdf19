import json
import subprocess
import sys
from pathlib import Path

import pytest

from levyzoom.cli import dispatch

ROOT = Path(__file__).resolve().parents[1]
MODELS = ROOT / "configs" / "models"


def write(path: Path, obj) -> str:
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def small_config(tmp_path, **kw):
    cfg = {"model": {"gamma": 0.0, "sigma2": 1.0, "jumps": []}, "eps": [2.0 ** -5, 2.0 ** -6],
           "n": 60, "seed": 9, "refine_k": 3, "n_reference": 500, **kw}
    return write(tmp_path / "cfg.json", cfg)


def test_classify_brownian(tmp_path):
    out = tmp_path / "o"
    assert dispatch(["classify", "--model", str(MODELS / "bm.json"), "--out", str(out)]) == 0
    rep = json.loads((out / "classify.json").read_text())
    assert rep["attractor"]["variant"] == "Brownian"
    assert "diagnostics" in rep["attractor"]
    assert [r["eps"] for r in rep["scaling"]] == pytest.approx([10.0 ** -j for j in range(2, 9)])


def test_classify_cpp_strict_exit_3(tmp_path):
    out = tmp_path / "o"
    assert dispatch(["classify", "--model", str(MODELS / "cpp_only.json"), "--strict", "--out", str(out)]) == 3
    assert json.loads((out / "classify.json").read_text())["attractor"]["variant"] == "NoAttractor"
    assert dispatch(["classify", "--model", str(MODELS / "cpp_only.json"), "--out", str(out)]) == 0


@pytest.mark.parametrize("content", ["{not json", json.dumps({"gamma": 0, "sigma2": -1}),
                                     json.dumps([1, 2]), json.dumps({"gamma": 0, "wings": 2})])
def test_malformed_model_exit_2_without_output(tmp_path, capsys, content):
    out = tmp_path / "o"
    bad = write(tmp_path / "bad.json", content)
    assert dispatch(["classify", "--model", bad, "--out", str(out), "--json-errors"]) == 2
    assert not out.exists()
    err = json.loads(capsys.readouterr().err.strip())
    assert set(err) == {"error", "message"}


def test_unknown_config_field_exit_2(tmp_path, capsys):
    out = tmp_path / "o"
    cfg = small_config(tmp_path, colour="red")
    assert dispatch(["simulate", "--config", cfg, "--out", str(out)]) == 2
    assert not out.exists()
    assert "colour" in capsys.readouterr().err


def test_bad_flags_exit_2(tmp_path):
    assert dispatch(["classify"]) == 2
    assert dispatch(["frobnicate"]) == 2
    assert dispatch(["scaling", "--model", str(MODELS / "bm.json"), "--eps-grid", "1:2"]) == 2
    assert dispatch(["limit", "--attractor", "wiggly:1", "--out", str(tmp_path / "x")]) == 2


def test_scaling(tmp_path):
    out = tmp_path / "o"
    assert dispatch(["scaling", "--model", str(MODELS / "stable_1.5.json"), "--eps-grid",
                     "1e-2:1e-4:logstep10", "--out", str(out)]) == 0
    rows = json.loads((out / "scaling.json").read_text())["scaling"]
    assert [r["a_eps"] for r in rows] == pytest.approx([e ** (2 / 3) for e in (1e-2, 1e-3, 1e-4)], rel=1e-6)
    assert dispatch(["scaling", "--model", str(MODELS / "cpp_only.json"), "--out", str(out)]) == 2


def test_simulate_twice_identical_and_threads(tmp_path, monkeypatch):
    cfg = small_config(tmp_path)
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert dispatch(["simulate", "--config", cfg, "--out", str(a)]) == 0
    assert dispatch(["simulate", "--config", cfg, "--out", str(b), "--threads", "3"]) == 0
    monkeypatch.setenv("LEVYZOOM_THREADS", "2")
    assert dispatch(["simulate", "--config", cfg, "--out", str(c)]) == 0
    for name in ("errors.csv", "simulate.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()
    lines = (a / "errors.csv").read_text().splitlines()
    assert lines[0] == "eps,delta_over_a,tau_gap,boundary_flag" and len(lines) == 1 + 2 * 60


def test_seed_override_changes_output(tmp_path):
    cfg = small_config(tmp_path)
    assert dispatch(["simulate", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert dispatch(["simulate", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "10"]) == 0
    assert (tmp_path / "a" / "errors.csv").read_bytes() != (tmp_path / "b" / "errors.csv").read_bytes()


def test_report(tmp_path):
    cfg = small_config(tmp_path)
    out = tmp_path / "o"
    assert dispatch(["report", "--config", cfg, "--reference", "bessel", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["metadata"]["seed"] == 9 and len(rep["per_eps"]) == 2
    assert dispatch(["report", "--config", cfg, "--reference", "uniform", "--out", str(tmp_path / "u")]) == 2


def test_limit_and_tau_check(tmp_path):
    out = tmp_path / "o"
    assert dispatch(["limit", "--attractor", "drift:-1", "--n", "1000", "--out", str(out)]) == 0
    s = json.loads((out / "limit.json").read_text())
    assert s["method"] == "reduced" and abs(s["mean_minus_v"] - 0.5) < 0.05
    assert len((out / "limit.csv").read_text().splitlines()) == 1001
    assert dispatch(["limit", "--attractor", "brownian", "--n", "200", "--k-window", "10", "--out", str(out)]) == 0
    att = write(tmp_path / "att.json", {"variant": "StrictlyStable", "alpha": 0.5, "c_plus_hat": 0.0,
                                        "c_minus_hat": 1.0})
    assert dispatch(["limit", "--attractor", att, "--n", "50", "--out", str(out)]) == 0
    assert dispatch(["tau-check", "--model", str(MODELS / "bm.json"), "--n", "50", "--eps", "0.0625",
                     "--refine-k", "3", "--out", str(out)]) == 0
    assert json.loads((out / "tau_check.json").read_text())["n"] == 50
    assert dispatch(["tau-check", "--model", str(MODELS / "bm.json"), "--eps", "1.0", "--out", str(out)]) == 2


def test_rw_check(tmp_path):
    out = tmp_path / "o"
    assert dispatch(["rw-check", "--model", str(MODELS / "rw_pareto1.json"), "--out", str(out)]) == 0
    rep = json.loads((out / "rw_check.json").read_text())
    ratios = [r["a_n_over_n"] for r in rep["a_n"]]
    assert rep["attracted"] and all(b > a for a, b in zip(ratios, ratios[1:]))
    assert dispatch(["rw-check", "--model", str(MODELS / "rw_two_point.json"), "--strict", "--out", str(out)]) == 3


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "levyzoom", "classify", "--model", "fixture:stable_1.5",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == ""
    assert json.loads((tmp_path / "classify.json").read_text())["attractor"]["alpha"] == 1.5
