"""Minimal homography solvers: 2SIFT, 3ORI and the normalized 4PT baseline.

Every solver works in Hartley-normalized coordinates internally and returns
canonical homographies in the caller's pixel frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .affine import SiftCorrespondence, dlt_rows
from .errors import DegenerateCloud, DegenerateConfiguration, EmptySolution, RankDeficient
from .geometry import (
    NormalizationTransform,
    as_homography,
    denormalize_homography,
    hartley_normalize,
)
from .polynomial import BivariateQuadratic, solve_two_quadratics

RANK_TOL = 1e-10
COLLINEAR_TOL = 1e-8


def sift_linear_row(c: SiftCorrespondence) -> np.ndarray:
    """Coefficients of the orientation constraint, linear in h1..h9."""
    u2, v2 = c.p2
    c1, s1 = math.cos(c.alpha1), math.sin(c.alpha1)
    c2, s2 = math.cos(c.alpha2), math.sin(c.alpha2)
    return np.array(
        [
            -s2 * c1,
            -s1 * s2,
            0.0,
            c1 * c2,
            s1 * c2,
            0.0,
            u2 * s2 * c1 - v2 * c1 * c2,
            u2 * s1 * s2 - v2 * s1 * c2,
            0.0,
        ]
    )


def sift_quadratic_residual(H, c: SiftCorrespondence, t: float = 1.0) -> float:
    """Scale constraint on H, quadratic in its entries.

    ``t`` rescales the terms carrying ``q2`` when the points are given in
    normalized coordinates; ``t = 1`` for pixel coordinates.
    """
    h1, h2, h3, h4, h5, h6, h7, h8, h9 = as_homography(H).ravel()
    u1, v1 = c.p1
    u2, v2 = c.p2
    q1, q2 = c.q1, c.q2
    t2 = t * t
    return (
        h7 * h7 * u1 * u1 * q2 * t2
        + 2 * h7 * h8 * u1 * v1 * q2 * t2
        + h8 * h8 * v1 * v1 * q2 * t2
        + h5 * h7 * u2 * q1
        - h4 * h8 * u2 * q1
        - h2 * h7 * v2 * q1
        + h1 * h8 * v2 * q1
        + 2 * h7 * h9 * u1 * q2 * t2
        + 2 * h8 * h9 * v1 * q2 * t2
        + h2 * h4 * q1
        - h1 * h5 * q1
        + h9 * h9 * q2 * t2
    )


def sift_quadratic_form(c: SiftCorrespondence, t: float = 1.0) -> np.ndarray:
    """Symmetric 9x9 ``Q`` with ``h @ Q @ h == sift_quadratic_residual(h, c, t)``."""
    u1, v1 = c.p1
    u2, v2 = c.p2
    depth = np.array([0, 0, 0, 0, 0, 0, u1, v1, 1.0])
    Q = c.q2 * t * t * np.outer(depth, depth)
    # bilinear terms (i, j, coefficient), indices zero-based
    for i, j, coef in (
        (4, 6, u2),
        (3, 7, -u2),
        (1, 6, -v2),
        (0, 7, v2),
        (1, 3, 1.0),
        (0, 4, -1.0),
    ):
        Q[i, j] += 0.5 * coef * c.q1
        Q[j, i] += 0.5 * coef * c.q1
    return Q


def build_2sift_system(c1: SiftCorrespondence, c2: SiftCorrespondence) -> np.ndarray:
    return np.vstack([dlt_rows(c1), dlt_rows(c2), sift_linear_row(c1), sift_linear_row(c2)])


@dataclass(frozen=True)
class HomographyBasis:
    """Null-space parameterization ``H = x * H1 + y * H2 + H3``."""

    H1: np.ndarray
    H2: np.ndarray
    H3: np.ndarray

    def assemble(self, x: float, y: float) -> np.ndarray:
        return (x * self.H1 + y * self.H2 + self.H3).reshape(3, 3)


def nullspace3(M) -> HomographyBasis:
    M = np.asarray(M, dtype=float)
    if M.shape != (6, 9):
        raise ValueError(f"expected a 6x9 system, got {M.shape}")
    _, sv, Vt = np.linalg.svd(M)
    if not sv[5] > RANK_TOL * sv[0]:
        raise RankDeficient(f"system rank below 6 (sigma6/sigma1 = {sv[5] / sv[0]:.2e})")
    return HomographyBasis(Vt[6].copy(), Vt[7].copy(), Vt[8].copy())


def quadratics_from_basis(
    basis: HomographyBasis, c1: SiftCorrespondence, c2: SiftCorrespondence, t: float = 1.0
) -> tuple[BivariateQuadratic, BivariateQuadratic]:
    b1, b2, b3 = basis.H1, basis.H2, basis.H3
    out = []
    for c in (c1, c2):
        Q = sift_quadratic_form(c, t)
        out.append(
            BivariateQuadratic(
                b1 @ Q @ b1,
                2 * b1 @ Q @ b2,
                b2 @ Q @ b2,
                2 * b1 @ Q @ b3,
                2 * b2 @ Q @ b3,
                b3 @ Q @ b3,
            )
        )
    return out[0], out[1]


def _normalize_sift(cs: Sequence[SiftCorrespondence]):
    try:
        T1, x1 = hartley_normalize([c.p1 for c in cs])
        T2, x2 = hartley_normalize([c.p2 for c in cs])
    except DegenerateCloud as exc:
        raise RankDeficient(str(exc)) from exc
    # similarities leave feature angles untouched; scales are handled by the caller
    normalized = [
        SiftCorrespondence(tuple(a), tuple(b), c.alpha1, c.alpha2, c.q1, c.q2)
        for a, b, c in zip(x1, x2, cs)
    ]
    return normalized, T1, T2


def solve_2sift(c1: SiftCorrespondence, c2: SiftCorrespondence, normalize: bool = True) -> list[np.ndarray]:
    """Homographies consistent with two orientation- and scale-covariant features.

    Returns up to four canonical candidates; picking one is left to the caller.
    """
    if c1.p1 == c2.p1 and c1.p2 == c2.p2:
        raise RankDeficient("the two correspondences coincide")
    if normalize:
        (n1, n2), T1, T2 = _normalize_sift([c1, c2])
        # areas scale with t**2, so det A picks up (t2/t1)**2 in normalized coordinates
        t = T2.t / T1.t
    else:
        n1, n2 = c1, c2
        T1 = T2 = NormalizationTransform.identity()
        t = 1.0
    basis = nullspace3(build_2sift_system(n1, n2))
    f, g = quadratics_from_basis(basis, n1, n2, t)
    roots = solve_two_quadratics(f, g)
    if not roots:
        raise EmptySolution("no real solutions")
    return [denormalize_homography(basis.assemble(x, y), T1, T2) for x, y in roots]


def _collinear(pts: np.ndarray) -> bool:
    i, j, k = np.array([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]).T
    d1 = pts[j] - pts[i]
    d2 = pts[k] - pts[i]
    return bool(np.any(np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) <= COLLINEAR_TOL))


def dlt_matrix(x1, x2) -> np.ndarray:
    """Stacked point constraints for ``(N, 2)`` arrays, shape ``(2N, 9)``."""
    n = len(x1)
    u1, v1 = x1[:, 0], x1[:, 1]
    u2, v2 = x2[:, 0], x2[:, 1]
    M = np.zeros((2 * n, 9))
    M[0::2, 0] = u1
    M[0::2, 1] = v1
    M[0::2, 2] = 1.0
    M[0::2, 6] = -u1 * u2
    M[0::2, 7] = -v1 * u2
    M[0::2, 8] = -u2
    M[1::2, 3] = u1
    M[1::2, 4] = v1
    M[1::2, 5] = 1.0
    M[1::2, 6] = -u1 * v2
    M[1::2, 7] = -v1 * v2
    M[1::2, 8] = -v2
    return M


def _normalized_points(x1, x2):
    try:
        T1, n1 = hartley_normalize(x1)
        T2, n2 = hartley_normalize(x2)
    except DegenerateCloud as exc:
        raise DegenerateConfiguration(str(exc)) from exc
    return T1, n1, T2, n2


def _dlt_solve(T1, n1, T2, n2) -> np.ndarray:
    _, sv, Vt = np.linalg.svd(dlt_matrix(n1, n2))
    if not sv[7] > RANK_TOL * sv[0]:
        raise DegenerateConfiguration("point configuration does not determine a homography")
    return denormalize_homography(Vt[-1], T1, T2)


def fit_homography_dlt(x1, x2) -> np.ndarray:
    """Normalized DLT least-squares fit to N >= 4 point pairs."""
    x1 = np.asarray(x1, dtype=float).reshape(-1, 2)
    x2 = np.asarray(x2, dtype=float).reshape(-1, 2)
    if len(x1) < 4 or len(x1) != len(x2):
        raise ValueError("need at least four matched points")
    return _dlt_solve(*_normalized_points(x1, x2))


def solve_4pt(cs: Sequence) -> np.ndarray:
    if len(cs) != 4:
        raise ValueError(f"4PT needs exactly four correspondences, got {len(cs)}")
    x1 = np.array([c.p1 for c in cs], dtype=float)
    x2 = np.array([c.p2 for c in cs], dtype=float)
    T1, n1, T2, n2 = _normalized_points(x1, x2)
    if _collinear(n1) or _collinear(n2):
        raise DegenerateConfiguration("three of the four points are collinear")
    return _dlt_solve(T1, n1, T2, n2)


def solve_3ori(cs: Sequence[SiftCorrespondence]) -> np.ndarray:
    """Three oriented features: six point rows plus three orientation rows.

    Feature scales are ignored.
    """
    if len(cs) != 3:
        raise ValueError(f"3ORI needs exactly three correspondences, got {len(cs)}")
    ncs, T1, T2 = _normalize_sift(cs)
    M = np.vstack([dlt_rows(c) for c in ncs] + [sift_linear_row(c) for c in ncs])
    _, sv, Vt = np.linalg.svd(M)
    if not sv[7] > RANK_TOL * sv[0]:
        raise RankDeficient(f"system rank below 8 (sigma8/sigma1 = {sv[7] / sv[0]:.2e})")
    return denormalize_homography(Vt[-1], T1, T2)


@dataclass(frozen=True)
class MinimalSolver:
    """A named minimal solver: ``estimate(sample) -> list of candidate homographies``."""

    name: str
    sample_size: int
    estimate: Callable[[Sequence[SiftCorrespondence]], list]

    def __call__(self, sample):
        return self.estimate(sample)


SOLVERS = {
    "2sift": MinimalSolver("2sift", 2, lambda s: solve_2sift(s[0], s[1])),
    "3ori": MinimalSolver("3ori", 3, lambda s: [solve_3ori(s)]),
    "4pt": MinimalSolver("4pt", 4, lambda s: [solve_4pt(s)]),
}


def get_solver(name: str) -> MinimalSolver:
    try:
        return SOLVERS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}") from None
