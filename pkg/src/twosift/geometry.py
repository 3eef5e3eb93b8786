"""Two-view primitives: homographies, point correspondences, normalization.

Homographies are plain ``(3, 3)`` float arrays whose entries h1..h9 are read
in row-major order. Points are length-2 sequences ``(u, v)`` in pixels; the
homogeneous coordinate is implicit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateCloud, DegenerateDepth, SingularHomography

DEPTH_TOL = 1e-12
# sigma_3 / sigma_1 <= SINGULAR_TOL counts as singular; pixel-frame
# homographies routinely have tiny determinants, so det alone is no guide
SINGULAR_TOL = 1e-14


def _check_point(p) -> tuple[float, float]:
    u, v = float(p[0]), float(p[1])
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValueError(f"point must be finite, got {(u, v)}")
    return u, v


@dataclass(frozen=True)
class PointCorrespondence:
    p1: tuple[float, float]
    p2: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "p1", _check_point(self.p1))
        object.__setattr__(self, "p2", _check_point(self.p2))


@dataclass(frozen=True)
class NormalizationTransform:
    """Similarity ``p -> t * p + (tx, ty)`` applied to one image."""

    t: float
    tx: float = 0.0
    ty: float = 0.0

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"normalization scale must be positive, got {self.t}")

    @classmethod
    def identity(cls) -> "NormalizationTransform":
        return cls(1.0, 0.0, 0.0)

    def matrix(self) -> np.ndarray:
        return np.array([[self.t, 0.0, self.tx], [0.0, self.t, self.ty], [0.0, 0.0, 1.0]])

    def inverse_matrix(self) -> np.ndarray:
        s = 1.0 / self.t
        return np.array([[s, 0.0, -self.tx * s], [0.0, s, -self.ty * s], [0.0, 0.0, 1.0]])

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts * self.t + np.array([self.tx, self.ty])


def as_homography(H) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.shape == (9,):
        H = H.reshape(3, 3)
    if H.shape != (3, 3):
        raise ValueError(f"homography must be 3x3 or a 9-vector, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("homography has non-finite entries")
    if not np.any(H):
        raise ValueError("homography is the zero matrix")
    return H


def canonicalize(H) -> np.ndarray:
    """Unit-Frobenius representative with h9 >= 0.

    When h9 vanishes the first nonzero entry in row-major order is made positive.
    """
    H = as_homography(H)
    Hc = H / np.linalg.norm(H)
    flat = Hc.ravel()
    if abs(flat[8]) > 1e-15:
        pivot = flat[8]
    else:
        pivot = flat[np.flatnonzero(np.abs(flat) > 1e-15)[0]]
    return Hc if pivot > 0 else -Hc


def apply_homography(H, p) -> tuple[float, float]:
    H = as_homography(H)
    u, v = _check_point(p)
    s = u * H[2, 0] + v * H[2, 1] + H[2, 2]
    if abs(s) <= DEPTH_TOL * np.linalg.norm(H):
        raise DegenerateDepth(f"projective depth {s:.3e} at {(u, v)}")
    return (
        (u * H[0, 0] + v * H[0, 1] + H[0, 2]) / s,
        (u * H[1, 0] + v * H[1, 1] + H[1, 2]) / s,
    )


def project_points(H, points) -> np.ndarray:
    """Vectorized transfer of an ``(N, 2)`` array; points sent to infinity become inf."""
    H = np.asarray(H, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    s = pts @ H[2, :2] + H[2, 2]
    num = pts @ H[:2, :2].T + H[:2, 2]
    bad = np.abs(s) <= DEPTH_TOL * math.sqrt((H * H).sum())
    if bad.any():
        s = np.where(bad, 1.0, s)
        out = num / s[:, None]
        out[bad] = np.inf
        return out
    return num / s[:, None]


def check_invertible(H) -> np.ndarray:
    H = as_homography(H)
    sv = np.linalg.svd(H, compute_uv=False)
    if not sv[2] > SINGULAR_TOL * sv[0]:
        raise SingularHomography("homography is not invertible")
    return H


def transfer_errors(H, x1, x2) -> np.ndarray:
    """Symmetric transfer errors for arrays of matched points, shape ``(N,)``."""
    H = check_invertible(H)
    Hinv = np.linalg.inv(H)
    x1 = np.asarray(x1, dtype=float).reshape(-1, 2)
    x2 = np.asarray(x2, dtype=float).reshape(-1, 2)
    d1 = project_points(H, x1) - x2
    d2 = project_points(Hinv, x2) - x1
    err = 0.5 * (np.sqrt((d1 * d1).sum(axis=1)) + np.sqrt((d2 * d2).sum(axis=1)))
    err[np.isnan(err)] = np.inf
    return err


def symmetric_transfer_error(H, c: PointCorrespondence) -> float:
    return float(transfer_errors(H, [c.p1], [c.p2])[0])


def hartley_normalize(points: Sequence) -> tuple[NormalizationTransform, np.ndarray]:
    """Move the centroid to the origin and scale the mean distance to sqrt(2)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 2:
        raise DegenerateCloud("need at least two points to normalize")
    centroid = pts.sum(axis=0) / n
    d = pts - centroid
    spread = np.sqrt((d * d).sum(axis=1)).sum() / n
    if not spread > 1e-12 * max(1.0, abs(centroid[0]), abs(centroid[1])):
        raise DegenerateCloud("all points coincide")
    t = math.sqrt(2.0) / spread
    T = NormalizationTransform(t, -t * centroid[0], -t * centroid[1])
    return T, d * t


def denormalize_homography(Hn, T1: NormalizationTransform, T2: NormalizationTransform) -> np.ndarray:
    Hn = as_homography(Hn)
    return canonicalize(T2.inverse_matrix() @ Hn @ T1.matrix())


def homography_distance(Ha, Hb) -> float:
    a = canonicalize(Ha)
    b = canonicalize(Hb)
    return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))
