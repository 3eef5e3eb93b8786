"""Homography estimation from two orientation- and scale-covariant features."""
from .affine import AffineCorrespondence, LocalFrame, SiftCorrespondence, affine_from_homography
from .errors import TwoSiftError
from .geometry import canonicalize, homography_distance, symmetric_transfer_error, transfer_errors
from .ransac import RansacConfig, RansacResult, classify_inliers, ransac, required_iterations
from .solvers import SOLVERS, get_solver, solve_2sift, solve_3ori, solve_4pt

__version__ = "0.1.0"

__all__ = [
    "AffineCorrespondence",
    "LocalFrame",
    "SiftCorrespondence",
    "affine_from_homography",
    "TwoSiftError",
    "canonicalize",
    "homography_distance",
    "symmetric_transfer_error",
    "transfer_errors",
    "RansacConfig",
    "RansacResult",
    "classify_inliers",
    "ransac",
    "required_iterations",
    "SOLVERS",
    "get_solver",
    "solve_2sift",
    "solve_3ori",
    "solve_4pt",
]
