"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``. The full file takes a few
minutes because the RANSAC criteria use 100 seeded runs per cell.
"""
import math
import time

import numpy as np
import pytest

from twosift.affine import (
    AffineCorrespondence,
    affine_from_homography,
    affine_from_jacobians,
    jacobian_from_frame,
    residual_det_constraint,
    residual_rotation_constraint,
)
from twosift.bench import run_ransac_benchmark, run_stability_study, summarize_ransac
from twosift.errors import TwoSiftError
from twosift.geometry import apply_homography, homography_distance
from twosift.polynomial import BivariateQuadratic, solve_two_quadratics
from twosift.ransac import RansacConfig, required_iterations
from twosift.solvers import sift_linear_row, sift_quadratic_form, sift_quadratic_residual, solve_2sift
from twosift.synthetic import (
    SceneConfig,
    generate_scene,
    random_frame,
    sift_from_affine,
)

from oracles import grid_roots

TABULATED = {
    2: [6, 16, 71, 458],
    3: [8, 34, 292, 4603],
    4: [12, 71, 1177, 46049],
}
TABULATED_OUTLIERS = [0.25, 0.5, 0.75, 0.9]


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}")
        assert ok, detail

    return emit


def test_criterion_1_generators(report):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(10_000):
        f1, f2 = random_frame(rng), random_frame(rng)
        J1, J2 = jacobian_from_frame(f1), jacobian_from_frame(f2)
        ac = AffineCorrespondence.from_matrix((0, 0), (0, 0), affine_from_jacobians(J1, J2))
        q1, q2 = np.linalg.det(J1), np.linalg.det(J2)
        worst = max(
            worst,
            abs(residual_det_constraint(ac, q1, q2)),
            abs(residual_rotation_constraint(ac, f1.alpha, f2.alpha, q1)),
        )
    report(1, "elimination generators vanish on 10^4 frame pairs", worst < 1e-8, f"max |residual| {worst:.2e}")


def test_criterion_2_homography_constraints(report):
    rng = np.random.default_rng(2)
    worst = 0.0
    done = 0
    while done < 10_000:
        H = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
        H[2, :2] *= 1e-3
        p1 = rng.uniform(0, 1000, 2)
        try:
            ac = affine_from_homography(H, p1)
            c, _ = sift_from_affine(p1, apply_homography(H, p1), ac.A, random_frame(rng))
        except TwoSiftError:
            # orientation-reversing or degenerate at this point; draw again
            continue
        h = H.ravel() / np.linalg.norm(H)
        lin = sift_linear_row(c) * h
        quad_scale = (np.abs(sift_quadratic_form(c)) * np.abs(np.outer(h, h))).sum()
        worst = max(
            worst,
            abs(lin.sum()) / np.abs(lin).sum(),
            abs(sift_quadratic_residual(h, c)) / quad_scale,
        )
        done += 1
    report(2, "linear and quadratic constraints on 10^4 configurations", worst < 1e-8, f"max relative {worst:.2e}")


def test_criterion_3_stability(report):
    start = time.perf_counter()
    res = run_stability_study(10_000, seed=3)
    elapsed = time.perf_counter() - start
    fractions = {k: res.fraction_below(k) for k in res.log_errors}
    ok = all(f >= 0.99 for f in fractions.values()) and elapsed < 60
    detail = ", ".join(f"{k} {100 * f:.2f}%" for k, f in fractions.items()) + f" below 1e-6 in {elapsed:.1f}s"
    report(3, "solver stability over 10^4 noise-free scenes", ok, detail)


def test_criterion_4_table_1(report):
    got = {
        m: [required_iterations(1 - e, m, 0.99, "nearest") for e in TABULATED_OUTLIERS] for m in TABULATED
    }
    report(4, "required iterations reproduce the tabulated counts", got == TABULATED, str(got))


def test_criterion_5_ransac_speedup(report):
    start = time.perf_counter()
    ratios = [0.25, 0.5, 0.75]
    scene = SceneConfig(n_points=100, noise_px=0.0)
    rows = summarize_ransac(run_ransac_benchmark(ratios, 100, RansacConfig(), seed=5, scene=scene))
    elapsed = time.perf_counter() - start
    med = {(r["outlier_ratio"], r["solver"]): r for r in rows}
    ok = elapsed < 120
    parts = []
    for e in ratios:
        a, b = med[(e, "2sift")], med[(e, "4pt")]
        theory = required_iterations(1 - e, 2, 0.99, "nearest")
        ok &= a["median_iterations"] < b["median_iterations"]
        ok &= theory / 4 <= a["median_iterations"] <= 4 * theory
        parts.append(f"{e:g}: 2sift {a['median_iterations']:g} (theory {theory}) vs 4pt {b['median_iterations']:g}")
    report(5, "2SIFT needs fewer RANSAC iterations", ok, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_criterion_6_accuracy_parity(report):
    scene = SceneConfig(n_points=100, noise_px=1.0)
    rows = summarize_ransac(run_ransac_benchmark([0.5], 100, RansacConfig(), seed=6, scene=scene))
    med = {r["solver"]: r["median_error_px"] for r in rows}
    ok = med["2sift"] <= 2 * med["4pt"]
    report(6, "2SIFT accuracy within 2x of 4PT", ok, f"median error 2sift {med['2sift']:.3f} px, 4pt {med['4pt']:.3f} px")


def test_criterion_7_polynomial_oracle(report):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        f, g = rng.normal(size=6), rng.normal(size=6)
        ours = solve_two_quadratics(BivariateQuadratic(*f), BivariateQuadratic(*g))
        ref = grid_roots(f, g)
        # the oracle searches [-5, 5]^2, so compare inside a smaller box
        inside = lambda r: max(abs(r[0]), abs(r[1])) <= 4  # noqa: E731
        near = lambda p, pool: any(math.hypot(p[0] - q[0], p[1] - q[1]) < 1e-6 for q in pool)  # noqa: E731
        if any(not near(r, ours) for r in ref if inside(r)) or any(not near(r, ref) for r in ours if inside(r)):
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 60
    report(7, "two-quadratic solver matches grid oracle on 10^3 systems", ok, f"{mismatches} mismatches, {elapsed:.1f}s")


def test_criterion_8_finite_differences(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    eps = 1e-3
    for i in range(1000):
        sc = generate_scene(SceneConfig(n_points=4), rng)
        p = np.array(sc.correspondences[i % 4].p1)
        cols = []
        for d in np.eye(2):
            a = np.array(apply_homography(sc.H_gt, p + eps * d))
            b = np.array(apply_homography(sc.H_gt, p - eps * d))
            cols.append((a - b) / (2 * eps))
        fd = np.column_stack(cols)
        A = affine_from_homography(sc.H_gt, p).A
        worst = max(worst, np.linalg.norm(A - fd) / np.linalg.norm(fd))
    report(8, "affine map matches central differences", worst < 1e-5, f"max relative error {worst:.2e}")


def test_criterion_9_normalization(report):
    rng = np.random.default_rng(9)
    # unit-scale intrinsics: the raw pixel-frame system is too badly conditioned to serve as reference
    cfg = SceneConfig(n_points=4, focal=1.0, image_size=1.0)
    bad, worst = 0, 0.0
    for _ in range(1000):
        sc = generate_scene(cfg, rng)
        try:
            a = solve_2sift(*sc.correspondences[:2], normalize=True)
            b = solve_2sift(*sc.correspondences[:2], normalize=False)
        except TwoSiftError:
            bad += 1
            continue
        if len(a) != len(b):
            bad += 1
            continue
        d = max(max(min(homography_distance(H, G) for G in b) for H in a),
                max(min(homography_distance(H, G) for G in a) for H in b))
        worst = max(worst, d)
        bad += d >= 1e-6
    report(9, "normalized and raw solves agree on 10^3 scenes", bad == 0, f"{bad} mismatches, worst distance {worst:.2e}")
