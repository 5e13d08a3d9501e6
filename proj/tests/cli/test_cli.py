import csv
import hashlib
import json
import os
import subprocess
from pathlib import Path

import pytest

BIN = os.environ.get("RTP_LDP_BIN", "rtp-ldp")
CW1 = '{"kind": "curie_weiss", "beta": 1}'


def run(*args, check=True):
    proc = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"exit {proc.returncode}: {proc.stderr}")
    return proc


def manifest(directory):
    return json.loads((Path(directory) / "manifest.json").read_text())


def output_hashes(directory):
    return {o["path"]: o["sha256"] for o in manifest(directory)["outputs"]}


def rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_simulate_at_time_zero(tmp_path):
    run("simulate", "--n-sites", 64, "--t-final", 0, "--seed", 1, "--out-dir", tmp_path)
    assert sorted(p.name for p in tmp_path.glob("snapshot_*.csv")) == ["snapshot_0000.csv"]
    assert len(rows(tmp_path / "magnetization.csv")) == 1
    snapshot = rows(tmp_path / "snapshot_0000.csv")
    assert list(snapshot[0].keys()) == ["t", "x_index", "sigma", "count"]
    assert len(snapshot) == 128
    for rel, digest in output_hashes(tmp_path).items():
        assert hashlib.sha256((tmp_path / rel).read_bytes()).hexdigest() == digest


def test_simulate_is_reproducible(tmp_path):
    args = ["--n-sites", 32, "--t-final", 0.5, "--seed", 9, "--rate", CW1, "--snapshot-count", 5]
    run("simulate", *args, "--out-dir", tmp_path / "a")
    run("simulate", *args, "--out-dir", tmp_path / "b")
    assert output_hashes(tmp_path / "a") == output_hashes(tmp_path / "b")
    run("simulate", "--spec", tmp_path / "a" / "manifest.json", "--out-dir", tmp_path / "c")
    assert output_hashes(tmp_path / "a") == output_hashes(tmp_path / "c")
    m = rows(tmp_path / "a" / "magnetization.csv")
    assert [float(r["t"]) for r in m] == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4, 0.5])


def test_replicas_write_per_replica_outputs(tmp_path):
    run("--threads", 2, "simulate", "--n-sites", 16, "--t-final", 0.2, "--replicas", 8, "--out-dir", tmp_path)
    replicas = sorted(p.name for p in tmp_path.glob("replica_*"))
    assert replicas == [f"replica_{i:04d}" for i in range(8)]
    aggregate = json.loads((tmp_path / "aggregate.json").read_text())
    assert aggregate["n_replicas"] == 8
    assert len(manifest(tmp_path)["seeds"]) == 8
    serial = ["simulate", "--n-sites", "16", "--t-final", "0.2", "--replicas", "8", "--out-dir", tmp_path / "serial"]
    subprocess.run([BIN, *serial], check=True, env=dict(os.environ, RTP_LDP_THREADS="1"))
    assert output_hashes(tmp_path / "serial") == output_hashes(tmp_path)


def test_usage_and_spec_errors_exit_2(tmp_path):
    assert run("simulate", "--n-sites", 0, "--out-dir", tmp_path, check=False).returncode == 2
    assert run("simulate", "--n-sites", 4, "--rate", "{bad", "--out-dir", tmp_path, check=False).returncode == 2
    assert run("simulate", "--n-sites", 4, "--rate", '{"kind": "nope"}', "--out-dir", tmp_path,
               check=False).returncode == 2
    assert run("frobnicate", check=False).returncode == 2
    assert run("verify", "nope", check=False).returncode == 2
    assert run("hydro", "--grid", 8, "--out-dir", tmp_path, "--initial", "uniform(-1,1)",
               check=False).returncode == 2


def test_runtime_errors_exit_1(tmp_path):
    proc = run("hydro", "--grid", 4, "--rate", '{"kind": "constant", "value": 1e4}', "--initial", "sine(1,0.5,+1)",
               "--out-dir", tmp_path, check=False)
    assert proc.returncode == 1


def test_hydro_constant_profile(tmp_path):
    run("hydro", "--grid", 16, "--t-final", 1, "--initial", "uniform(1,1)", "--out-dir", tmp_path)
    values = {float(r["value"]) for r in rows(tmp_path / "trajectory.csv")}
    assert values == {1.0}
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["mass_drift"] < 1e-12
    assert meta["magnetization_residual"] == 0.0


def test_zero_tilt_matches_hydro_bitwise(tmp_path):
    args = ["--grid", 64, "--t-final", 0.5, "--initial", "sine(1,0.3,+1)", "--rate", CW1]
    run("hydro", *args, "--out-dir", tmp_path / "h")
    zero = tmp_path / "zero.json"
    zero.write_text("{}")
    run("perturbed", *args, "--tilt", zero, "--out-dir", tmp_path / "p")
    assert (tmp_path / "h" / "trajectory.csv").read_bytes() == (tmp_path / "p" / "trajectory.csv").read_bytes()
    assert json.loads((tmp_path / "p" / "metadata.json").read_text())["mass_drift"] < 1e-12


def test_rate_reports(tmp_path):
    args = ["--grid", 64, "--t-final", 0.5, "--initial", "sine(1,0.3,+1)", "--rate", CW1]
    run("hydro", *args, "--out-dir", tmp_path / "h")
    run("rate", "--trajectory", tmp_path / "h" / "trajectory.csv", "--reference-density", "sine(1,0.3,+1)",
        "--rate", CW1, "--out", tmp_path / "typical.json")
    typical = json.loads((tmp_path / "typical.json").read_text())
    assert typical["total"] < 1e-5
    assert not typical["singular"]
    assert (tmp_path / "typical.manifest.json").exists()

    run("perturbed", *args, "--tilt", '{"sigma_plus": [{"k": 1, "cos": [0.4]}]}', "--out-dir", tmp_path / "p")
    run("rate", "--trajectory", tmp_path / "p" / "trajectory.csv", "--reference-density", "sine(1,0.3,+1)",
        "--rate", CW1, "--out", tmp_path / "tilted.json")
    tilted = json.loads((tmp_path / "tilted.json").read_text())
    assert tilted["i_tr"] > 0.0
    grid = tilted["reconstructed_tilt"]
    assert len(grid["values"]) == grid["n_times"] * grid["grid_size"]
    assert max(abs(v) for v in grid["values"]) == pytest.approx(0.4, abs=0.02)


def test_rate_flags_layer_symmetric_defect(tmp_path):
    # both layers grow uniformly in time: no flux can produce this path
    lines = ["t,x_index,sigma,value"]
    for k in range(5):
        for x in range(8):
            for sigma in (1, -1):
                lines.append(f"{0.1 * k!r},{x},{sigma},{1.0 + 0.1 * k!r}")
    path = tmp_path / "defect.csv"
    path.write_text("\n".join(lines) + "\n")
    run("rate", "--trajectory", path, "--reference-density", "uniform(1,1)", "--out", tmp_path / "r.json")
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["singular"]
    assert report["h_residual_norm"] == pytest.approx(1.0)


def test_verify_suite(tmp_path):
    proc = run("verify", "picard", "--out-dir", tmp_path)
    report = json.loads(proc.stdout)
    assert report["passed"]
    assert report["criteria"][0]["measurements"][0]["comparator"] == "<"
    assert json.loads((tmp_path / "report.json").read_text()) == report
    assert "PASS" in proc.stderr
