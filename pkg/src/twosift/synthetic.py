"""Ground-truth two-view scenes of a random plane seen by two cameras.

Cameras sit on a sphere around the origin and look at it; the plane passes
through the origin and its points lie within unit distance of it. The
homography is fitted to four projected plane points with the normalized DLT,
so perturbing those four points is what perturbs the affine information.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .affine import (
    LocalFrame,
    SiftCorrespondence,
    frame_from_jacobian,
    jacobian_from_frame,
)
from .errors import DegenerateConfiguration, DegenerateDepth, DegenerateScene, GeometryError, NonPositiveScale
from .geometry import DEPTH_TOL
from .solvers import fit_homography_dlt

MAX_TRIES = 100
MIN_BASELINE = math.radians(10.0)
# cosine between plane normal and viewing direction; below this the view is grazing
MIN_VIEW_COS = 0.2
SCALE_RANGE = (0.5, 2.0)
SHEAR_RANGE = (-0.5, 0.5)
OUTLIER_SCALE_RANGE = (0.25, 4.0)
ANCHOR_RADIUS = 0.7
ANCHOR_JITTER = math.pi / 8


@dataclass(frozen=True)
class SceneConfig:
    distance_ratio: float = 5.0
    n_points: int = 10
    noise_px: float = 0.0
    noise_angle: float = 0.0
    noise_scale: float = 0.0
    outlier_ratio: float = 0.0
    seed: int = 0
    focal: float = 1000.0
    image_size: float = 1000.0

    def __post_init__(self):
        if not self.distance_ratio > 0:
            raise ValueError("distance_ratio must be positive")
        if self.n_points < 4:
            raise ValueError("n_points must be at least 4")
        if min(self.noise_px, self.noise_angle, self.noise_scale) < 0:
            raise ValueError("noise levels must be non-negative")
        if not 0 <= self.outlier_ratio < 1:
            raise ValueError("outlier_ratio must lie in [0, 1)")

    @property
    def intrinsics(self) -> np.ndarray:
        c = self.image_size / 2
        return np.array([[self.focal, 0.0, c], [0.0, self.focal, c], [0.0, 0.0, 1.0]])

    def with_(self, **changes) -> "SceneConfig":
        return replace(self, **changes)


@dataclass
class GroundTruthScene:
    H_gt: np.ndarray
    correspondences: list[SiftCorrespondence]
    frames: list[tuple[LocalFrame, LocalFrame]]
    outliers: np.ndarray
    anchors1: np.ndarray
    anchors2: np.ndarray
    P1: np.ndarray = field(repr=False, default=None)
    P2: np.ndarray = field(repr=False, default=None)

    @property
    def inliers(self) -> np.ndarray:
        return ~self.outliers

    def inlier_correspondences(self) -> list[SiftCorrespondence]:
        return [c for c, bad in zip(self.correspondences, self.outliers) if not bad]

    def point_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        x1 = np.array([c.p1 for c in self.correspondences])
        x2 = np.array([c.p2 for c in self.correspondences])
        return x1, x2


def _unit(v):
    return v / np.linalg.norm(v)


def _look_at_origin(center, rng) -> np.ndarray:
    z = _unit(-center)
    while True:
        x = np.cross(rng.normal(size=3), z)
        if np.linalg.norm(x) > 1e-3:
            break
    x = _unit(x)
    y = np.cross(z, x)
    return np.vstack([x, y, z])


def _camera(K, center, rng) -> np.ndarray:
    R = _look_at_origin(center, rng)
    return K @ np.hstack([R, (-R @ center)[:, None]])


def _project(P, X):
    Xh = np.hstack([X, np.ones((len(X), 1))])
    x = Xh @ P.T
    return x[:, :2] / x[:, 2:], x[:, 2]


def _disc_points(rng, n, e1, e2):
    r = np.sqrt(rng.uniform(size=n))
    phi = rng.uniform(0, 2 * np.pi, size=n)
    return (r * np.cos(phi))[:, None] * e1 + (r * np.sin(phi))[:, None] * e2


def _anchor_points(rng, e1, e2):
    # a jittered, randomly rotated quadrilateral near the rim; keeps the
    # four-point fit well conditioned once its inputs are perturbed
    phi = rng.uniform(0, 2 * np.pi) + np.arange(4) * (np.pi / 2) + rng.uniform(-ANCHOR_JITTER, ANCHOR_JITTER, 4)
    r = rng.uniform(ANCHOR_RADIUS, 1.0, size=4)
    return (r * np.cos(phi))[:, None] * e1 + (r * np.sin(phi))[:, None] * e2


def random_frame(rng) -> LocalFrame:
    lo, hi = np.log(SCALE_RANGE)
    return LocalFrame(
        alpha=rng.uniform(0, 2 * np.pi),
        qu=float(np.exp(rng.uniform(lo, hi))),
        qv=float(np.exp(rng.uniform(lo, hi))),
        w=rng.uniform(*SHEAR_RANGE),
    )


def random_correspondence(rng, image_size: float) -> SiftCorrespondence:
    lo, hi = np.log(OUTLIER_SCALE_RANGE)
    u = rng.uniform(0, image_size, size=4)
    a = rng.uniform(0, 2 * np.pi, size=2)
    q = np.exp(rng.uniform(lo, hi, size=2))
    return SiftCorrespondence((u[0], u[1]), (u[2], u[3]), a[0], a[1], q[0], q[1])


def sift_from_affine(p1, p2, A, f1: LocalFrame) -> tuple[SiftCorrespondence, LocalFrame]:
    """Simulate detector output: J2 = A J1, angle and scale read off each Jacobian."""
    J1 = jacobian_from_frame(f1)
    J2 = np.asarray(A) @ J1
    f2 = frame_from_jacobian(J2)
    q1 = f1.qu * f1.qv
    q2 = float(np.linalg.det(J2))
    return SiftCorrespondence(tuple(p1), tuple(p2), f1.alpha, f2.alpha, q1, q2), f2


def _affine_field(H, x1) -> np.ndarray:
    # local affinities of H at every row of x1, shape (N, 2, 2)
    s = x1 @ H[2, :2] + H[2, 2]
    if np.any(np.abs(s) <= DEPTH_TOL * np.linalg.norm(H)):
        raise DegenerateDepth("a point maps to the line at infinity")
    x2 = (x1 @ H[:2, :2].T + H[:2, 2]) / s[:, None]
    A = (H[None, :2, :2] - x2[:, :, None] * H[None, 2:, :2]) / s[:, None, None]
    return A


def _second_frames(A, f1s) -> tuple[np.ndarray, np.ndarray, list[LocalFrame]]:
    """Vectorized :func:`sift_from_affine`: (alpha2, q2, frames) for every point."""
    alpha = np.array([f.alpha for f in f1s])
    c, s = np.cos(alpha), np.sin(alpha)
    qu = np.array([f.qu for f in f1s])
    qv = np.array([f.qv for f in f1s])
    w = np.array([f.w for f in f1s])
    J1 = np.empty((len(f1s), 2, 2))
    J1[:, 0, 0], J1[:, 0, 1] = c * qu, c * w - s * qv
    J1[:, 1, 0], J1[:, 1, 1] = s * qu, s * w + c * qv
    J2 = A @ J1
    a2 = np.arctan2(J2[:, 1, 0], J2[:, 0, 0])
    c2, s2 = np.cos(a2), np.sin(a2)
    qu2 = np.hypot(J2[:, 0, 0], J2[:, 1, 0])
    w2 = c2 * J2[:, 0, 1] + s2 * J2[:, 1, 1]
    qv2 = c2 * J2[:, 1, 1] - s2 * J2[:, 0, 1]
    if not np.all(qv2 > 0):
        raise NonPositiveScale("second Jacobian is not orientation preserving")
    a2 = np.mod(a2, 2 * np.pi)
    frames = [LocalFrame(*vals) for vals in zip(a2.tolist(), qu2.tolist(), qv2.tolist(), w2.tolist())]
    return a2, qu2 * qv2, frames


def generate_scene(cfg: SceneConfig, rng: np.random.Generator | None = None) -> GroundTruthScene:
    """Noise-free scene following ``cfg``; outliers are uniform random features."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    K = cfg.intrinsics
    r = cfg.distance_ratio
    for _ in range(MAX_TRIES):
        C1 = r * _unit(rng.normal(size=3))
        C2 = r * _unit(rng.normal(size=3))
        if math.acos(np.clip(C1 @ C2 / (r * r), -1, 1)) < MIN_BASELINE:
            continue
        n = _unit(rng.normal(size=3))
        d1, d2 = n @ C1 / r, n @ C2 / r
        if d1 * d2 <= 0 or min(abs(d1), abs(d2)) < MIN_VIEW_COS:
            continue
        P1, P2 = _camera(K, C1, rng), _camera(K, C2, rng)
        e1 = _unit(np.cross(n, rng.normal(size=3)))
        e2 = np.cross(n, e1)
        X = _disc_points(rng, cfg.n_points, e1, e2)
        anchors = _anchor_points(rng, e1, e2)
        x1, z1 = _project(P1, np.vstack([X, anchors]))
        x2, z2 = _project(P2, np.vstack([X, anchors]))
        if min(z1.min(), z2.min()) < 0.1:
            continue
        try:
            H = fit_homography_dlt(x1[-4:], x2[-4:])
            A = _affine_field(H, x1[:-4])
            f1s = [random_frame(rng) for _ in range(cfg.n_points)]
            alpha2, q2, f2s = _second_frames(A, f1s)
        except (GeometryError, DegenerateConfiguration):
            continue
        corrs = [
            SiftCorrespondence(tuple(p1), tuple(p2), f1.alpha, a2, f1.qu * f1.qv, q)
            for p1, p2, f1, a2, q in zip(x1[:-4].tolist(), x2[:-4].tolist(), f1s, alpha2.tolist(), q2.tolist())
        ]
        frames = list(zip(f1s, f2s))
        break
    else:
        raise DegenerateScene(f"no valid scene after {MAX_TRIES} attempts")

    outliers = np.zeros(cfg.n_points, dtype=bool)
    k = int(round(cfg.outlier_ratio * cfg.n_points))
    if k:
        idx = rng.choice(cfg.n_points, size=k, replace=False)
        outliers[idx] = True
        for i in idx:
            corrs[i] = random_correspondence(rng, cfg.image_size)
    return GroundTruthScene(H, corrs, frames, outliers, x1[-4:], x2[-4:], P1, P2)


def add_noise(
    scene: GroundTruthScene, cfg: SceneConfig, rng: np.random.Generator | None = None
) -> GroundTruthScene:
    """Perturb points, affinities (through the four anchor points), angles and scales.

    The same number of random draws is made whatever the noise levels, so two
    configurations differing only in their noise share the underlying samples.
    """
    if cfg.noise_px == 0 and cfg.noise_angle == 0 and cfg.noise_scale == 0:
        return scene
    if rng is None:
        rng = np.random.default_rng([cfg.seed, 1])
    n = len(scene.correspondences)
    anchor_noise = rng.normal(size=(2, 4, 2)) * cfg.noise_px
    point_noise = rng.normal(size=(2, n, 2)) * cfg.noise_px
    angle_noise = rng.normal(size=(2, n)) * cfg.noise_angle
    scale_noise = rng.normal(size=(2, n)) * cfg.noise_scale

    H_noisy = fit_homography_dlt(scene.anchors1 + anchor_noise[0], scene.anchors2 + anchor_noise[1])
    x1, x2 = scene.point_arrays()
    x1 = x1 + point_noise[0]
    x2 = x2 + point_noise[1]
    alpha1 = np.array([c.alpha1 for c in scene.correspondences])
    alpha2 = np.array([c.alpha2 for c in scene.correspondences])
    q1 = np.array([c.q1 for c in scene.correspondences])
    q2 = np.array([c.q2 for c in scene.correspondences])
    inl = np.flatnonzero(scene.inliers)
    try:
        A = _affine_field(H_noisy, x1[inl])
        a2, s2, _ = _second_frames(A, [scene.frames[i][0] for i in inl])
        alpha2[inl], q2[inl] = a2, s2
    except GeometryError:
        # a perturbed fit this far off leaves the clean feature geometry in place
        pass
    alpha1 = alpha1 + angle_noise[0]
    alpha2 = alpha2 + angle_noise[1]
    q1 = np.maximum(q1 * (1 + scale_noise[0]), 1e-12)
    q2 = np.maximum(q2 * (1 + scale_noise[1]), 1e-12)
    corrs = [
        SiftCorrespondence(tuple(p), tuple(r), *vals)
        for p, r, *vals in zip(x1.tolist(), x2.tolist(), alpha1.tolist(), alpha2.tolist(), q1.tolist(), q2.tolist())
    ]
    return replace(scene, correspondences=corrs)
