import json
import subprocess
import sys

import pytest

GOLDEN_CURVE = """eps,t,R,L_used,certified_lower
0.25,2,0.188721876,1,
0.125,3,0.456435558,1,
0.0625,4,0.662709929,1,
0.03125,5,0.799377678,1,
0.015625,6,0.883884923,1,
"""


def run_cli(*args, **kw):
    return subprocess.run([sys.executable, "-m", "rdimlab", *args],
                          capture_output=True, text=True, **kw)


@pytest.fixture()
def bern05(tmp_path):
    path = tmp_path / "bern05.json"
    path.write_text(json.dumps({
        "name": "bern05",
        "alphabet": {"labels": ["a", "b"], "dist": [[0, 1], [1, 0]]},
        "model": {"type": "iid", "probs": [0.5, 0.5]},
    }))
    return str(path)


def test_rd_curve_golden_csv(bern05, tmp_path):
    out = tmp_path / "curve.csv"
    res = run_cli("rd", "curve", "--system", bern05, "--t", "2..6",
                  "--L", "1,2", "--out", str(out))
    assert res.returncode == 0, res.stderr
    assert out.read_text() == GOLDEN_CURVE


def test_rd_curve_json_output(bern05, tmp_path):
    out = tmp_path / "curve.json"
    res = run_cli("rd", "curve", "--system", bern05, "--t", "2..4",
                  "--L", "1", "--out", str(out))
    assert res.returncode == 0, res.stderr
    doc = json.loads(out.read_text())
    assert len(doc["samples"]) == 3


def test_rd_dim(bern05):
    res = run_cli("rd", "dim", "--system", bern05, "--t", "4..10", "--L", "1")
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    assert doc["rdim_upper"] <= 0.2


def test_mix_check_invalid_weights_exits_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({
        "mixture": {"alphabet": {"labels": ["a", "b"], "dist": [[0, 1], [1, 0]]},
                    "components": [
                        {"weight": 0.5, "model": {"type": "iid", "probs": [0.9, 0.1]}},
                        {"weight": 0.4, "model": {"type": "iid", "probs": [0.1, 0.9]}}]},
        "eps": [0.1], "L": [1]}))
    res = run_cli("mix", "check", "--config", str(cfg))
    assert res.returncode == 2
    assert "weights sum to 0.9" in res.stderr


def test_mix_check_passes(tmp_path):
    cfg = tmp_path / "mix.json"
    cfg.write_text(json.dumps({
        "mixture": {"alphabet": {"labels": ["a", "b"], "dist": [[0, 1], [1, 0]]},
                    "components": [
                        {"weight": 0.5, "model": {"type": "iid", "probs": [0.9, 0.1]}},
                        {"weight": 0.5, "model": {"type": "iid", "probs": [0.1, 0.9]}}]},
        "eps": [0.1], "L": [1, 2]}))
    res = run_cli("mix", "check", "--config", str(cfg))
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    assert doc["passed"]


def test_mix_decompose(tmp_path):
    cfg = tmp_path / "mix.json"
    cfg.write_text(json.dumps({
        "mixture": {"alphabet": {"labels": ["a", "b"], "dist": [[0, 1], [1, 0]]},
                    "components": [
                        {"weight": 0.5, "model": {"type": "iid", "probs": [0.8, 0.2]}},
                        {"weight": 0.5, "model": {"type": "iid", "probs": [0.2, 0.8]}}]},
        "t": [3, 4, 5, 6], "L": [1]}))
    res = run_cli("mix", "decompose", "--config", str(cfg))
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["passed"]


def test_cover_subcommand(tmp_path):
    space = tmp_path / "space.json"
    space.write_text(json.dumps(
        {"labels": ["x", "y", "z"], "dist": [[0, 1, 1], [1, 0, 1], [1, 1, 0]]}))
    res = run_cli("cover", "--space", str(space), "--eps", "0.5")
    assert res.returncode == 0
    assert json.loads(res.stdout)["covering_number"] == 3


def test_dim_subcommand(bern05):
    res = run_cli("dim", "--system", bern05, "--t", "2..6")
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    assert doc["S_bits_per_site"] == [1.0] * 5


def test_cert_check_subcommand(tmp_path):
    cfg = tmp_path / "cert.json"
    cfg.write_text(json.dumps({"family": "cluster", "m": 1, "g": 2, "L": 1}))
    res = run_cli("cert", "check", "--config", str(cfg))
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    assert doc["feasible"] and doc["margin"] == pytest.approx(-0.40625)
    cfg.write_text(json.dumps({"family": "gapped", "k": 2, "L": 1}))
    res = run_cli("cert", "check", "--config", str(cfg), "--mode", "monte_carlo",
                  "--samples", "50000", "--seed", "3")
    assert res.returncode == 0, res.stderr


def test_example_subcommands(tmp_path):
    for name in ("section4", "section5", "interleaved", "discontinuity"):
        res = run_cli("example", name, "--out", str(tmp_path / f"{name}.json"))
        assert res.returncode == 0, (name, res.stderr)
        json.loads((tmp_path / f"{name}.json").read_text())
    res = run_cli("example", "nosuch")
    assert res.returncode == 2


def test_unknown_flag_exits_2(bern05):
    res = run_cli("rd", "curve", "--system", bern05, "--nope")
    assert res.returncode == 2


def test_verify_all_deterministic_and_green():
    first = run_cli("verify", "all", "--seed", "7")
    second = run_cli("verify", "all", "--seed", "7")
    assert first.returncode == 0, first.stdout + first.stderr
    assert second.returncode == 0
    assert first.stdout == second.stdout
    assert "10/10 criteria passed" in first.stdout


def test_rd_curve_eps_list(bern05):
    res = run_cli("rd", "curve", "--system", bern05, "--eps", "0.2,0.1,0.05", "--L", "1")
    assert res.returncode == 0, res.stderr
    assert len(res.stdout.splitlines()) == 4
    res_bad = run_cli("rd", "curve", "--system", bern05, "--eps", "0.05,0.1", "--L", "1")
    assert res_bad.returncode == 2
    assert "decreasing" in res_bad.stderr
