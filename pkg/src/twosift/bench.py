"""Synthetic experiments: solver stability, image-noise and feature-noise sweeps,
and RANSAC iteration/accuracy comparisons.

Run ``i`` of an experiment seeded with ``seed`` always draws from
``default_rng([seed, i])``, so results do not depend on execution order and
different cells of a sweep share their underlying scenes.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import SolverError, GeometryError, EstimationError
from .geometry import homography_distance, transfer_errors
from .ransac import RansacConfig, compare_solvers, required_iterations
from .solvers import SOLVERS, get_solver
from .synthetic import SceneConfig, add_noise, generate_scene

DEFAULT_SOLVERS = ("2sift", "3ori", "4pt")
# log10 errors are clipped into this range before binning
LOG_FLOOR, LOG_CEIL = -17.0, 2.0


def run_rng(seed: int, run: int) -> np.random.Generator:
    return np.random.default_rng([seed, run])


def _solvers(names):
    return [get_solver(n) for n in names]


def _pick_candidate(candidates, x1, x2):
    # the candidate best explaining all observed correspondences
    best, best_err = None, np.inf
    for H in candidates:
        try:
            err = float(np.mean(transfer_errors(H, x1, x2)))
        except GeometryError:
            continue
        if err < best_err or best is None:
            best, best_err = H, err
    return best


@dataclass
class StabilityResult:
    log_errors: dict[str, np.ndarray]
    edges: np.ndarray = field(default_factory=lambda: np.arange(LOG_FLOOR, LOG_CEIL + 0.25, 0.5))

    def fraction_below(self, solver: str, log_threshold: float = -6.0) -> float:
        e = self.log_errors[solver]
        return float(np.mean(e < log_threshold))

    def histogram_rows(self) -> list[dict]:
        rows = []
        for name, e in self.log_errors.items():
            counts, _ = np.histogram(np.clip(e, LOG_FLOOR, LOG_CEIL - 1e-9), bins=self.edges)
            for lo, hi, k in zip(self.edges[:-1], self.edges[1:], counts):
                rows.append({"solver": name, "bin_lo": f"{lo:.1f}", "bin_hi": f"{hi:.1f}", "count": int(k)})
        return rows


def run_stability_study(
    runs: int,
    seed: int = 0,
    solvers: Sequence[str] = DEFAULT_SOLVERS,
    scene: SceneConfig = SceneConfig(),
) -> StabilityResult:
    """Noise-free scenes; each solver sees its minimal sample (the first m points).

    For each run the best candidate's distance to the true homography is
    recorded as log10; solver failures are recorded as ``LOG_CEIL``.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    chosen = _solvers(solvers)
    out = {s.name: np.empty(runs) for s in chosen}
    for i in range(runs):
        sc = generate_scene(scene, run_rng(seed, i))
        for s in chosen:
            try:
                cands = s(sc.correspondences[: s.sample_size])
                err = min(homography_distance(H, sc.H_gt) for H in cands)
                out[s.name][i] = math.log10(err) if err > 0 else LOG_FLOOR
            except (SolverError, GeometryError):
                out[s.name][i] = LOG_CEIL
    return StabilityResult(out)


def _noisy_trial(cfg: SceneConfig, rng, chosen) -> dict[str, tuple[float, float]]:
    """One noisy scene; per solver (reprojection error vs clean points, Frobenius error)."""
    clean = generate_scene(cfg, rng)
    noisy = add_noise(clean, cfg, rng)
    c1, c2 = clean.point_arrays()
    n1, n2 = noisy.point_arrays()
    results = {}
    for s in chosen:
        try:
            cands = s(noisy.correspondences[: s.sample_size])
        except (SolverError, GeometryError):
            continue
        H = _pick_candidate(cands, n1, n2)
        if H is None:
            continue
        results[s.name] = (
            float(np.mean(transfer_errors(H, c1, c2))),
            homography_distance(H, clean.H_gt),
        )
    return results


def _summarize(samples: dict[str, list], chosen, runs: int, **keys) -> list[dict]:
    rows = []
    for s in chosen:
        vals = np.array(samples[s.name]).reshape(-1, 2)
        finite = vals[np.isfinite(vals[:, 0])]
        rows.append(
            {
                **keys,
                "solver": s.name,
                "mean_error_px": float(finite[:, 0].mean()) if len(finite) else math.nan,
                "median_error_px": float(np.median(finite[:, 0])) if len(finite) else math.nan,
                "mean_frobenius": float(finite[:, 1].mean()) if len(finite) else math.nan,
                "runs": runs,
                "failures": runs - len(finite),
            }
        )
    return rows


def _cell(cfg: SceneConfig, runs: int, seed: int, chosen) -> dict[str, list]:
    samples = {s.name: [] for s in chosen}
    for i in range(runs):
        res = _noisy_trial(cfg, run_rng(seed, i), chosen)
        for name, vals in res.items():
            samples[name].append(vals)
    return samples


def run_noise_sweep(
    sigmas: Sequence[float],
    ratios: Sequence[float],
    runs: int,
    seed: int = 0,
    solvers: Sequence[str] = DEFAULT_SOLVERS,
    scene: SceneConfig = SceneConfig(),
) -> list[dict]:
    """Mean errors over a (noise sigma x distance ratio) grid."""
    if not sigmas or not ratios:
        raise ValueError("noise sweep axes must be non-empty")
    chosen = _solvers(solvers)
    rows = []
    for sigma in sigmas:
        for ratio in ratios:
            cfg = scene.with_(noise_px=float(sigma), distance_ratio=float(ratio))
            samples = _cell(cfg, runs, seed, chosen)
            rows += _summarize(samples, chosen, runs, sigma=float(sigma), distance_ratio=float(ratio))
    return rows


def run_sift_noise_sweep(
    angle_noises: Sequence[float],
    scale_noises: Sequence[float],
    runs: int,
    seed: int = 0,
    solvers: Sequence[str] = DEFAULT_SOLVERS,
    scene: SceneConfig = SceneConfig(),
    noise_px: float = 1.0,
    fixed_scale_noise: float = 0.01,
    fixed_angle_noise: float = math.radians(1.0),
) -> list[dict]:
    """Error against orientation noise (scale noise held at 1%) and against
    scale noise (orientation noise held at 1 degree), with 1 px point noise.

    Angle noise is in radians, scale noise a fraction.
    """
    if not angle_noises or not scale_noises:
        raise ValueError("sift noise lists must be non-empty")
    chosen = _solvers(solvers)
    rows = []
    for a in angle_noises:
        cfg = scene.with_(noise_px=noise_px, noise_angle=float(a), noise_scale=fixed_scale_noise)
        rows += _summarize(
            _cell(cfg, runs, seed, chosen), chosen, runs,
            sweep="angle", noise_angle=float(a), noise_scale=fixed_scale_noise,
        )
    for q in scale_noises:
        cfg = scene.with_(noise_px=noise_px, noise_angle=fixed_angle_noise, noise_scale=float(q))
        rows += _summarize(
            _cell(cfg, runs, seed, chosen), chosen, runs,
            sweep="scale", noise_angle=fixed_angle_noise, noise_scale=float(q),
        )
    return rows


def run_ransac_benchmark(
    outlier_ratios: Sequence[float],
    runs: int,
    config: RansacConfig = RansacConfig(),
    seed: int = 0,
    solvers: Sequence[str] = ("2sift", "4pt"),
    scene: SceneConfig = SceneConfig(n_points=100, noise_px=1.0),
) -> list[dict]:
    """Per-run records of RANSAC with every solver on scenes with planted outliers.

    ``error`` is the mean symmetric transfer error against the noise-free
    inliers. Failed runs carry ``failed=True`` and NaN statistics.
    """
    chosen = _solvers(solvers)
    records = []
    for ratio in outlier_ratios:
        cfg = scene.with_(outlier_ratio=float(ratio))
        for i in range(runs):
            rng = run_rng(seed, i)
            clean = generate_scene(cfg, rng)
            noisy = add_noise(clean, cfg, rng)
            reference = clean.inlier_correspondences()
            run_cfg = RansacConfig(
                threshold=config.threshold,
                confidence=config.confidence,
                max_iterations=config.max_iterations,
                seed=int(np.random.SeedSequence([seed, i]).generate_state(1)[0]),
                refit=config.refit,
            )
            for s in chosen:
                base = {"outlier_ratio": float(ratio), "run": i, "solver": s.name}
                try:
                    row = compare_solvers(noisy.correspondences, [s], run_cfg, reference)[0]
                except (EstimationError, SolverError, GeometryError):
                    records.append({**base, "error": math.nan, "iterations": math.nan,
                                    "time_ms": math.nan, "failed": True})
                    continue
                records.append({**base, "error": row["error"], "iterations": row["iterations"],
                                "time_ms": row["time_ms"], "failed": False})
    return records


def summarize_ransac(records: Iterable[dict], confidence: float = 0.99) -> list[dict]:
    """Median error / iterations / time per (outlier ratio, solver)."""
    groups: dict[tuple, list[dict]] = {}
    for r in records:
        groups.setdefault((r["outlier_ratio"], r["solver"]), []).append(r)
    rows = []
    for (ratio, name), rs in groups.items():
        ok = [r for r in rs if not r["failed"]]
        med = lambda k: float(np.median([r[k] for r in ok])) if ok else math.nan  # noqa: E731
        rows.append(
            {
                "outlier_ratio": ratio,
                "solver": name,
                "median_error_px": med("error"),
                "median_iterations": med("iterations"),
                "median_time_ms": med("time_ms"),
                "theoretical_iterations": required_iterations(
                    1 - ratio, SOLVERS[name].sample_size, confidence, "nearest"
                ),
                "runs": len(rs),
                "failures": len(rs) - len(ok),
            }
        )
    return rows


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def write_csv(rows: Sequence[dict], target) -> None:
    """Write dict rows with a header taken from the first row's keys."""
    if not rows:
        raise ValueError("nothing to write")
    fields = list(rows[0])
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    fh = open(target, "w", newline="") if own else target
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in fields])
    finally:
        if own:
            fh.close()


def to_csv_string(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
