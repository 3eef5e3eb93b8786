import json

import numpy as np
import pytest

from twosift import __version__
from twosift.cli import main
from twosift.geometry import homography_distance
from twosift.records import HEADER, read_correspondences


def write_identity(path, n=50):
    rng = np.random.default_rng(0)
    lines = [HEADER]
    for u, v in rng.uniform(0, 500, (n, 2)):
        a, q = rng.uniform(0, 6), rng.uniform(0.5, 2)
        lines.append(f"{u},{v},{u},{v},{a},{a},{q},{q}")
    path.write_text("\n".join(lines) + "\n")


def test_estimate_identity(tmp_path):
    src, out = tmp_path / "in.csv", tmp_path / "out.json"
    write_identity(src)
    assert main(["estimate", str(src), "--solver", "2SIFT", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) >= {"homography", "inliers", "iterations", "time_ms", "solver", "config", "version"}
    assert homography_distance(np.array(doc["homography"]), np.eye(3)) < 1e-8
    assert doc["inliers"] == list(range(50))
    assert doc["version"] == __version__ and doc["config"]["threshold"] == 2.0


def test_estimate_parse_error(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    src.write_text(f"{HEADER}\n1,2,3,4,0,0,1,1\n1,2,3,oops,0,0,1,1\n")
    assert main(["estimate", str(src)]) != 0
    assert "line 3" in capsys.readouterr().err


def test_estimate_insufficient_data(tmp_path, capsys):
    src = tmp_path / "one.csv"
    src.write_text(f"{HEADER}\n1,2,3,4,0,0,1,1\n")
    assert main(["estimate", str(src)]) != 0
    assert "InsufficientData" in capsys.readouterr().err


def test_estimate_missing_file(tmp_path):
    assert main(["estimate", str(tmp_path / "nope.csv")]) != 0


def test_synth_round_trip(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["synth", "-o", str(out), "--n-points", "40", "--seed", "3"]) == 0
    truth = json.loads((tmp_path / "s.csv.truth.json").read_text())
    assert truth["version"] == __version__ and truth["config"]["seed"] == 3
    assert len(truth["outliers"]) == 40 and not any(truth["outliers"])
    res = tmp_path / "r.json"
    for solver in ("2sift", "3ori", "4pt"):
        assert main(["estimate", str(out), "--solver", solver, "-o", str(res)]) == 0
        est = json.loads(res.read_text())["homography"]
        assert homography_distance(np.array(est), np.array(truth["H_gt"])) < 1e-6


def test_synth_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["synth", "-o", str(a), "--seed", "9", "--noise-px", "1", "--outlier-ratio", "0.3"])
    main(["synth", "-o", str(b), "--seed", "9", "--noise-px", "1", "--outlier-ratio", "0.3"])
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.truth.json").read_text() == (tmp_path / "b.csv.truth.json").read_text()


def test_synth_heavy_outliers_still_writes(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["synth", "-o", str(out), "--n-points", "20", "--outlier-ratio", "0.95"]) == 0
    assert len(read_correspondences(out)) == 20


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("TWOSIFT_SEED", "12")
    main(["synth", "-o", str(tmp_path / "e.csv")])
    assert json.loads((tmp_path / "e.csv.truth.json").read_text())["config"]["seed"] == 12
    # an explicit flag wins
    main(["synth", "-o", str(tmp_path / "f.csv"), "--seed", "2"])
    assert json.loads((tmp_path / "f.csv.truth.json").read_text())["config"]["seed"] == 2


def test_bench_stability_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["bench", "stability", "--runs", "1000", "--seed", "5", "-o", str(a)]) == 0
    assert main(["bench", "stability", "--runs", "1000", "--seed", "5", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "stability:" in capsys.readouterr().out
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
    assert meta["version"] == __version__ and meta["config"]["runs"] == 1000


def test_bench_noise_single_cell(tmp_path):
    out = tmp_path / "n.csv"
    args = ["bench", "noise", "--runs", "5", "--sigmas", "1", "--ratios", "5", "--solvers", "4pt", "-o", str(out)]
    assert main(args) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2 and lines[0].startswith("sigma,distance_ratio,solver")


def test_bench_sift_noise(tmp_path):
    out = tmp_path / "s.csv"
    args = ["bench", "sift-noise", "--runs", "3", "--angle-noise-deg", "0,5", "--scale-noise", "0.1", "-o", str(out)]
    assert main(args) == 0
    assert len(out.read_text().splitlines()) == 1 + 3 * 3


def test_bench_ransac(tmp_path):
    out = tmp_path / "r.csv"
    args = ["bench", "ransac", "--runs", "15", "--outlier-ratios", "0.5", "--noise-px", "0", "-o", str(out)]
    assert main(args) == 0
    rows = {}
    header, *body = out.read_text().splitlines()
    for line in body:
        rec = dict(zip(header.split(","), line.split(",")))
        rows[rec["solver"]] = rec
    assert float(rows["2sift"]["median_iterations"]) < float(rows["4pt"]["median_iterations"])


def test_bench_unknown_suite(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["bench", "nope", "-o", str(tmp_path / "x.csv")])
    assert info.value.code != 0


def test_bench_unwritable_output(tmp_path):
    assert main(["bench", "stability", "--runs", "2", "-o", str(tmp_path / "missing" / "x.csv")]) != 0
