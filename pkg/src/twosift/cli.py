"""Command-line interface: ``twosift estimate | bench | synth``.

Every randomized command takes ``--seed``; when it is omitted the
``TWOSIFT_SEED`` environment variable is used, then 0.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    DEFAULT_SOLVERS,
    run_noise_sweep,
    run_ransac_benchmark,
    run_sift_noise_sweep,
    run_stability_study,
    summarize_ransac,
    write_csv,
)
from .errors import TwoSiftError
from .geometry import canonicalize
from .ransac import RansacConfig, ransac
from .records import read_correspondences, write_correspondences
from .solvers import SOLVERS, get_solver
from .synthetic import SceneConfig, add_noise, generate_scene

SEED_ENV = "TWOSIFT_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: {SEED_ENV} must be an integer, got {raw!r}") from None


def _floats(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("expected at least one number")
    return vals


def _solver_list(text: str) -> list[str]:
    names = [t.strip().lower() for t in text.split(",") if t.strip()]
    for n in names:
        if n not in SOLVERS:
            raise argparse.ArgumentTypeError(f"unknown solver {n!r}; choose from {sorted(SOLVERS)}")
    return names


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    return obj


def _dump(doc: dict, target) -> None:
    text = json.dumps(_jsonable(doc), indent=2) + "\n"
    if target is None or str(target) == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text)


def _add_scene_flags(p: argparse.ArgumentParser, n_points, noise_px) -> None:
    p.add_argument("--n-points", type=int, default=n_points, help="correspondences per scene")
    p.add_argument("--distance-ratio", type=float, default=5.0, help="camera distance / object size")
    p.add_argument("--noise-px", type=float, default=noise_px, help="image noise sigma in pixels")
    p.add_argument("--focal", type=float, default=1000.0)
    p.add_argument("--image-size", type=float, default=1000.0)


def _scene_from_args(args, **extra) -> SceneConfig:
    return SceneConfig(
        distance_ratio=args.distance_ratio,
        n_points=args.n_points,
        noise_px=args.noise_px,
        focal=args.focal,
        image_size=args.image_size,
        seed=args.seed,
        **extra,
    )


def cmd_estimate(args) -> int:
    cs = read_correspondences(args.input, degrees=args.degrees)
    solver = get_solver(args.solver)
    config = RansacConfig(
        threshold=args.threshold,
        confidence=args.confidence,
        max_iterations=args.max_iterations,
        seed=args.seed,
        refit=args.refit,
    )
    result = ransac(cs, solver, config)
    doc = {
        "homography": canonicalize(result.homography).ravel(),
        "inliers": result.inliers,
        "score": result.score,
        "iterations": result.iterations,
        "skipped": result.skipped,
        "time_ms": result.time_ms,
        "solver": solver.name,
        "config": {**dataclasses.asdict(config), "input": str(args.input), "degrees": args.degrees},
        "version": __version__,
    }
    _dump(doc, args.output)
    return 0


def _bench_stability(args):
    scene = _scene_from_args(args)
    res = run_stability_study(args.runs, args.seed, args.solvers, scene)
    summary = ", ".join(f"{k} {100 * res.fraction_below(k):.2f}% below 1e-6" for k in res.log_errors)
    return res.histogram_rows(), summary, {"scene": scene}


def _bench_noise(args):
    scene = _scene_from_args(args)
    rows = run_noise_sweep(args.sigmas, args.ratios, args.runs, args.seed, args.solvers, scene)
    summary = f"{len(rows)} rows over {len(args.sigmas)} sigma x {len(args.ratios)} ratio cells"
    return rows, summary, {"scene": scene, "sigmas": args.sigmas, "ratios": args.ratios}


def _bench_sift_noise(args):
    scene = _scene_from_args(args)
    angles = [math.radians(a) for a in args.angle_noise_deg]
    rows = run_sift_noise_sweep(
        angles, args.scale_noise, args.runs, args.seed, args.solvers, scene, noise_px=args.noise_px
    )
    summary = f"{len(rows)} rows ({len(angles)} angle and {len(args.scale_noise)} scale noise levels)"
    extra = {"scene": scene, "angle_noise_rad": angles, "scale_noise": args.scale_noise}
    return rows, summary, extra


def _bench_ransac(args):
    scene = _scene_from_args(args)
    config = RansacConfig(
        threshold=args.threshold,
        confidence=args.confidence,
        max_iterations=args.max_iterations,
        seed=args.seed,
        refit=args.refit,
    )
    records = run_ransac_benchmark(args.outlier_ratios, args.runs, config, args.seed, args.solvers, scene)
    rows = summarize_ransac(records, args.confidence)
    summary = "; ".join(
        f"{r['solver']}@{r['outlier_ratio']:g}: median {r['median_iterations']:g} iterations, "
        f"{r['median_error_px']:.3g} px"
        for r in rows
    )
    return rows, summary, {"scene": scene, "ransac": config, "outlier_ratios": args.outlier_ratios}


SUITES = {
    "stability": _bench_stability,
    "noise": _bench_noise,
    "sift-noise": _bench_sift_noise,
    "ransac": _bench_ransac,
}


def cmd_bench(args) -> int:
    rows, summary, extra = SUITES[args.suite](args)
    write_csv(rows, args.output)
    meta = {
        "suite": args.suite,
        "version": __version__,
        "config": {
            "runs": args.runs,
            "seed": args.seed,
            "solvers": list(args.solvers),
            **{k: dataclasses.asdict(v) if dataclasses.is_dataclass(v) else v for k, v in extra.items()},
        },
    }
    _dump(meta, f"{args.output}.meta.json")
    print(f"{args.suite}: {summary} -> {args.output}")
    return 0


def cmd_synth(args) -> int:
    cfg = _scene_from_args(
        args,
        noise_angle=math.radians(args.noise_angle_deg),
        noise_scale=args.noise_scale,
        outlier_ratio=args.outlier_ratio,
    )
    rng = np.random.default_rng(cfg.seed)
    clean = generate_scene(cfg, rng)
    scene = add_noise(clean, cfg, rng)
    config = dataclasses.asdict(cfg)
    write_correspondences(
        scene.correspondences,
        args.output,
        comments=[f"twosift {__version__}", "config " + json.dumps(config, sort_keys=True)],
    )
    truth = args.truth or f"{args.output}.truth.json"
    _dump(
        {
            "H_gt": canonicalize(scene.H_gt).ravel(),
            "outliers": scene.outliers,
            "config": config,
            "version": __version__,
        },
        truth,
    )
    print(f"wrote {len(scene.correspondences)} correspondences ({int(scene.outliers.sum())} outliers) "
          f"to {args.output}, ground truth to {truth}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twosift", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    p = sub.add_parser("estimate", help="robustly fit a homography to a correspondence file")
    p.add_argument("input", help="CSV with header u1,v1,u2,v2,alpha1,alpha2,q1,q2")
    p.add_argument("--solver", default="2sift", type=str.lower, choices=sorted(SOLVERS))
    p.add_argument("--threshold", type=float, default=2.0, help="inlier threshold in pixels")
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--max-iterations", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--refit", action="store_true", help="least-squares DLT on the final inliers")
    p.add_argument("--degrees", action="store_true", help="angle columns are in degrees")
    p.add_argument("--output", "-o", default=None, help="result JSON path (default: stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bench", help="run a synthetic benchmark suite and write a CSV table")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--output", "-o", required=True, help="CSV path; config goes to <output>.meta.json")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--solvers", type=_solver_list, default=None,
                   help="comma-separated subset of 2sift,3ori,4pt")
    p.add_argument("--sigmas", type=_floats, default=[0.0, 0.5, 1.0, 2.0], help="noise suite: pixel sigmas")
    p.add_argument("--ratios", type=_floats, default=[2.0, 5.0, 10.0], help="noise suite: distance ratios")
    p.add_argument("--angle-noise-deg", type=_floats, default=[0.0, 1.0, 5.0, 10.0],
                   help="sift-noise suite: orientation noise levels in degrees")
    p.add_argument("--scale-noise", type=_floats, default=[0.0, 0.01, 0.05, 0.1],
                   help="sift-noise suite: scale noise levels (fractions)")
    p.add_argument("--outlier-ratios", type=_floats, default=[0.25, 0.5, 0.75], help="ransac suite")
    p.add_argument("--threshold", type=float, default=2.0, help="ransac suite: inlier threshold (px)")
    p.add_argument("--confidence", type=float, default=0.99, help="ransac suite")
    p.add_argument("--max-iterations", type=int, default=100_000, help="ransac suite")
    p.add_argument("--refit", action="store_true", help="ransac suite: refit on inliers")
    # None: resolved per suite in _bench_defaults
    _add_scene_flags(p, n_points=None, noise_px=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write a synthetic correspondence file plus ground truth")
    p.add_argument("--output", "-o", required=True, help="correspondence CSV path")
    p.add_argument("--truth", default=None, help="ground-truth JSON (default: <output>.truth.json)")
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--noise-angle-deg", type=float, default=0.0, help="orientation noise sigma in degrees")
    p.add_argument("--noise-scale", type=float, default=0.0, help="relative scale noise sigma")
    p.add_argument("--outlier-ratio", type=float, default=0.0)
    _add_scene_flags(p, n_points=100, noise_px=0.0)
    p.set_defaults(func=cmd_synth)
    return parser


def _bench_defaults(args) -> None:
    if args.command != "bench":
        return
    if args.solvers is None:
        args.solvers = ["2sift", "4pt"] if args.suite == "ransac" else list(DEFAULT_SOLVERS)
    robust = args.suite == "ransac"
    if args.n_points is None:
        args.n_points = 100 if robust else 10
    if args.noise_px is None:
        args.noise_px = 1.0 if args.suite in ("ransac", "sift-noise") else 0.0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _bench_defaults(args)
    try:
        return args.func(args)
    except (TwoSiftError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
