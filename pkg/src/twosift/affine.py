"""Affine correspondences, Jacobian frames and the covariant-feature constraints.

A local affine transformation ``A`` is the first-order approximation of the
homography at a point pair. For orientation- and scale-covariant features it
factors as ``A = J2 @ inv(J1)`` where each ``J_i = R(alpha_i) @ [[qu, w], [0, qv]]``.
Eliminating the unobservable per-axis scales and shear leaves two polynomial
constraints tying ``A`` to the detector's angles and scales; they are exposed
here as residual functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDepth, NonPositiveScale, SingularAffinity, SingularJacobian
from .geometry import (
    DEPTH_TOL,
    NormalizationTransform,
    PointCorrespondence,
    _check_point,
    apply_homography,
    as_homography,
)

JACOBIAN_TOL = 1e-12


@dataclass(frozen=True)
class AffineCorrespondence:
    p1: tuple[float, float]
    p2: tuple[float, float]
    a1: float
    a2: float
    a3: float
    a4: float

    def __post_init__(self):
        object.__setattr__(self, "p1", _check_point(self.p1))
        object.__setattr__(self, "p2", _check_point(self.p2))
        if self.a1 * self.a4 - self.a2 * self.a3 == 0:
            raise SingularAffinity("local affine transformation is singular")

    @classmethod
    def from_matrix(cls, p1, p2, A) -> "AffineCorrespondence":
        A = np.asarray(A, dtype=float)
        return cls(p1, p2, A[0, 0], A[0, 1], A[1, 0], A[1, 1])

    @property
    def A(self) -> np.ndarray:
        return np.array([[self.a1, self.a2], [self.a3, self.a4]])


@dataclass(frozen=True)
class SiftCorrespondence:
    """Point pair with per-image feature orientation (radians) and scale.

    Angles are taken as supplied by the detector, in the image coordinate
    frame of the caller; no handedness conversion is applied.
    """

    p1: tuple[float, float]
    p2: tuple[float, float]
    alpha1: float
    alpha2: float
    q1: float
    q2: float

    def __post_init__(self):
        object.__setattr__(self, "p1", _check_point(self.p1))
        object.__setattr__(self, "p2", _check_point(self.p2))
        for name in ("alpha1", "alpha2", "q1", "q2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if not (self.q1 > 0 and self.q2 > 0):
            raise ValueError(f"feature scales must be positive, got {self.q1}, {self.q2}")

    @property
    def points(self) -> PointCorrespondence:
        return PointCorrespondence(self.p1, self.p2)

    @property
    def scale_ratio(self) -> float:
        return self.q2 / self.q1


@dataclass(frozen=True)
class LocalFrame:
    alpha: float
    qu: float
    qv: float
    w: float = 0.0

    def __post_init__(self):
        if not (self.qu > 0 and self.qv > 0):
            raise NonPositiveScale(f"frame scales must be positive, got {self.qu}, {self.qv}")


def affine_from_homography(H, p1) -> AffineCorrespondence:
    """Jacobian of the homography's point transfer evaluated at ``p1``."""
    H = as_homography(H)
    u1, v1 = _check_point(p1)
    h = H.ravel()
    s = u1 * h[6] + v1 * h[7] + h[8]
    if abs(s) <= DEPTH_TOL * np.linalg.norm(H):
        raise DegenerateDepth(f"projective depth {s:.3e} at {(u1, v1)}")
    u2, v2 = apply_homography(H, (u1, v1))
    return AffineCorrespondence(
        (u1, v1),
        (u2, v2),
        (h[0] - h[6] * u2) / s,
        (h[1] - h[7] * u2) / s,
        (h[3] - h[6] * v2) / s,
        (h[4] - h[7] * v2) / s,
    )


def dlt_rows(c) -> np.ndarray:
    """The two point-transfer constraints on h1..h9, shape ``(2, 9)``."""
    u1, v1 = c.p1
    u2, v2 = c.p2
    return np.array(
        [
            [u1, v1, 1.0, 0.0, 0.0, 0.0, -u1 * u2, -v1 * u2, -u2],
            [0.0, 0.0, 0.0, u1, v1, 1.0, -u1 * v2, -v1 * v2, -v2],
        ]
    )


def affine_rows(ac: AffineCorrespondence) -> np.ndarray:
    """The four constraints contributed by the local affinity, shape ``(4, 9)``."""
    u1, v1 = ac.p1
    u2, v2 = ac.p2
    a1, a2, a3, a4 = ac.a1, ac.a2, ac.a3, ac.a4
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -(u2 + a1 * u1), -a1 * v1, -a1],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -a2 * u1, -(u2 + a2 * v1), -a2],
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -(v2 + a3 * u1), -a3 * v1, -a3],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -a4 * u1, -(v2 + a4 * v1), -a4],
        ]
    )


def rotation(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]])


def jacobian_from_frame(f: LocalFrame) -> np.ndarray:
    return rotation(f.alpha) @ np.array([[f.qu, f.w], [0.0, f.qv]])


def frame_from_jacobian(J) -> LocalFrame:
    """Inverse of :func:`jacobian_from_frame` (a QR split with positive diagonal)."""
    J = np.asarray(J, dtype=float)
    alpha = math.atan2(J[1, 0], J[0, 0])
    U = rotation(alpha).T @ J
    if not (U[0, 0] > 0 and U[1, 1] > 0):
        raise NonPositiveScale("Jacobian is not orientation preserving")
    return LocalFrame(alpha % (2 * math.pi), U[0, 0], U[1, 1], U[0, 1])


def affine_from_jacobians(J1, J2) -> np.ndarray:
    J1 = np.asarray(J1, dtype=float)
    J2 = np.asarray(J2, dtype=float)
    det = np.linalg.det(J1)
    if abs(det) <= JACOBIAN_TOL * max(1.0, np.abs(J1).max() ** 2):
        raise SingularJacobian("first Jacobian is singular")
    return J2 @ np.linalg.inv(J1)


def complete_second_frame(A, f1: LocalFrame) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if abs(np.linalg.det(A)) <= JACOBIAN_TOL * max(1.0, np.abs(A).max() ** 2):
        raise SingularAffinity("affine transformation is singular")
    return A @ jacobian_from_frame(f1)


def scale_of_jacobian(J) -> float:
    det = float(np.linalg.det(np.asarray(J, dtype=float)))
    if det <= 0:
        raise NonPositiveScale(f"det J = {det:.3e} is not positive")
    return det


def residual_det_constraint(ac: AffineCorrespondence, q1: float, q2: float) -> float:
    # vanishes iff det A == q2 / q1
    return q1 * q1 * ac.a2 * ac.a3 - q1 * q1 * ac.a1 * ac.a4 + q1 * q2


def residual_rotation_constraint(ac: AffineCorrespondence, alpha1: float, alpha2: float, q1: float) -> float:
    c1, s1 = math.cos(alpha1), math.sin(alpha1)
    c2, s2 = math.cos(alpha2), math.sin(alpha2)
    return (
        c1 * s2 * q1 * ac.a1
        + s1 * s2 * q1 * ac.a2
        - c1 * c2 * q1 * ac.a3
        - c2 * s1 * q1 * ac.a4
    )


def scale_affine_for_normalization(
    ac: AffineCorrespondence, T1: NormalizationTransform, T2: NormalizationTransform
) -> AffineCorrespondence:
    """Express an affine correspondence in Hartley-normalized coordinates.

    Translations do not touch the 2x2 block, so the affinity just picks up the
    ratio of the two uniform scales.
    """
    k = T2.t / T1.t
    p1 = T1.apply(ac.p1)
    p2 = T2.apply(ac.p2)
    return AffineCorrespondence(tuple(p1), tuple(p2), k * ac.a1, k * ac.a2, k * ac.a3, k * ac.a4)
