"""Adaptive RANSAC over any minimal solver."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateConfiguration,
    GeometryError,
    InsufficientData,
    NoModelFound,
    SingularHomography,
    SolverError,
)
from .geometry import transfer_errors
from .solvers import MinimalSolver, fit_homography_dlt

ITERATION_CAP = 10**9
REFIT_ROUNDS = 10


@dataclass(frozen=True)
class RansacConfig:
    threshold: float = 2.0
    confidence: float = 0.99
    max_iterations: int = 100_000
    seed: int = 0
    refit: bool = False

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class RansacResult:
    homography: np.ndarray
    inlier_mask: np.ndarray
    iterations: int
    score: int
    skipped: int = 0
    time_ms: float = 0.0

    @property
    def inliers(self) -> np.ndarray:
        return np.flatnonzero(self.inlier_mask)


def required_iterations(
    inlier_ratio: float,
    sample_size: int,
    confidence: float,
    mode: str = "ceil",
    max_iterations: int = ITERATION_CAP,
) -> int:
    """Samples needed to draw one all-inlier minimal sample with the given confidence.

    ``mode`` picks the rounding of ``log(1 - confidence) / log(1 - ratio**m)``:
    ``"ceil"`` (used for termination), ``"nearest"`` or ``"floor"``.
    """
    if not 0 < inlier_ratio <= 1:
        raise ValueError("inlier_ratio must lie in (0, 1]")
    if sample_size < 1:
        raise ValueError("sample_size must be positive")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    if inlier_ratio == 1:
        return 1
    p = inlier_ratio**sample_size
    denom = math.log1p(-p)
    if denom == 0:
        return max_iterations
    n = math.log1p(-confidence) / denom
    if mode == "ceil":
        k = math.ceil(n)
    elif mode == "nearest":
        k = math.floor(n + 0.5)
    elif mode == "floor":
        k = math.floor(n)
    else:
        raise ValueError(f"unknown rounding mode {mode!r}")
    return int(min(max(1, k), max_iterations))


def _points(cs) -> tuple[np.ndarray, np.ndarray]:
    x1 = np.array([c.p1 for c in cs], dtype=float).reshape(-1, 2)
    x2 = np.array([c.p2 for c in cs], dtype=float).reshape(-1, 2)
    return x1, x2


def classify_inliers(H, cs: Sequence, threshold: float) -> np.ndarray:
    x1, x2 = _points(cs)
    return transfer_errors(H, x1, x2) <= threshold


def _score(H, x1, x2, threshold):
    try:
        mask = transfer_errors(H, x1, x2) <= threshold
    except SingularHomography:
        return None
    return mask


def _refit(H, mask, score, x1, x2, threshold, rounds=REFIT_ROUNDS):
    # least-squares DLT on the inliers, repeated while the consensus set grows
    for _ in range(rounds):
        if score < 4:
            break
        try:
            H_new = fit_homography_dlt(x1[mask], x2[mask])
        except DegenerateConfiguration:
            break
        mask_new = _score(H_new, x1, x2, threshold)
        if mask_new is None or mask_new.sum() < score:
            break
        grew = mask_new.sum() > score
        H, mask, score = H_new, mask_new, int(mask_new.sum())
        if not grew:
            break
    return H, mask, score


def ransac(cs: Sequence, solver: MinimalSolver, config: RansacConfig = RansacConfig()) -> RansacResult:
    """Vanilla adaptive RANSAC scoring every candidate a sample produces by inlier count.

    Samples on which the solver fails are skipped and counted. With
    ``config.refit`` the winner is re-estimated by normalized DLT on its
    inliers and the inlier mask is recomputed, repeating while the inlier set
    keeps growing (at most ``REFIT_ROUNDS`` times).
    """
    start = time.perf_counter()
    m = solver.sample_size
    n = len(cs)
    if n < m:
        raise InsufficientData(f"{solver.name} needs {m} correspondences, got {n}")
    x1, x2 = _points(cs)
    rng = np.random.default_rng(config.seed)
    cap = config.max_iterations

    best_H, best_mask, best_score = None, None, -1
    bound = cap
    iterations = skipped = 0
    while iterations < bound:
        iterations += 1
        sample = [cs[i] for i in rng.choice(n, size=m, replace=False)]
        try:
            candidates = solver(sample)
        except (SolverError, GeometryError):
            skipped += 1
            continue
        for H in candidates:
            mask = _score(H, x1, x2, config.threshold)
            if mask is None:
                continue
            score = int(mask.sum())
            if score > best_score:
                best_H, best_mask, best_score = H, mask, score
                bound = required_iterations(score / n, m, config.confidence, "ceil", cap) if score else cap

    if best_H is None or best_score < m + 1:
        raise NoModelFound(f"no model with more than {m} inliers after {iterations} samples")

    if config.refit:
        best_H, best_mask, best_score = _refit(best_H, best_mask, best_score, x1, x2, config.threshold)

    return RansacResult(
        homography=best_H,
        inlier_mask=best_mask,
        iterations=iterations,
        score=best_score,
        skipped=skipped,
        time_ms=1e3 * (time.perf_counter() - start),
    )


def compare_solvers(
    cs: Sequence, solvers: Sequence[MinimalSolver], config: RansacConfig = RansacConfig(), reference=None
) -> list[dict]:
    """Run RANSAC once per solver on the same data and seed.

    ``error`` is the mean symmetric transfer error over ``reference``
    correspondences when given (e.g. noise-free ground truth), otherwise over
    each run's own inliers.
    """
    rows = []
    if reference is not None:
        r1, r2 = _points(reference)
    for solver in solvers:
        result = ransac(cs, solver, config)
        if reference is None:
            x1, x2 = _points([cs[i] for i in result.inliers])
        else:
            x1, x2 = r1, r2
        error = float(np.mean(transfer_errors(result.homography, x1, x2)))
        rows.append(
            {
                "solver": solver.name,
                "error": error,
                "iterations": result.iterations,
                "time_ms": result.time_ms,
                "inliers": result.score,
            }
        )
    return rows
