"""Common real roots of two bivariate quadratics.

The unknown ``y`` is hidden in the coefficients, the Sylvester resultant
eliminates it and leaves a univariate polynomial of degree at most four in
``x``. Its roots come from the eigenvalues of the companion matrix; for every
root the matching ``y`` values are recovered and all real pairs are polished
by a few Newton steps on the full system.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DegenerateSystem

IMAG_TOL = 1e-6
ZERO_TOL = 1e-13
CANDIDATE_TOL = 1e-4
RESIDUAL_TOL = 1e-9
CLUSTER_TOL = 1e-7
NEWTON_STEPS = 8


@dataclass(frozen=True)
class BivariateQuadratic:
    """``c20 x^2 + c11 xy + c02 y^2 + c10 x + c01 y + c00``."""

    c20: float
    c11: float
    c02: float
    c10: float
    c01: float
    c00: float

    @classmethod
    def from_array(cls, coeffs) -> "BivariateQuadratic":
        return cls(*(float(c) for c in coeffs))

    def as_array(self) -> np.ndarray:
        return np.array([self.c20, self.c11, self.c02, self.c10, self.c01, self.c00])

    def __call__(self, x, y):
        return (
            self.c20 * x * x
            + self.c11 * x * y
            + self.c02 * y * y
            + self.c10 * x
            + self.c01 * y
            + self.c00
        )

    def gradient(self, x, y) -> tuple:
        return (
            2 * self.c20 * x + self.c11 * y + self.c10,
            self.c11 * x + 2 * self.c02 * y + self.c01,
        )

    def swapped(self) -> "BivariateQuadratic":
        return BivariateQuadratic(self.c02, self.c11, self.c20, self.c01, self.c10, self.c00)

    def scaled(self) -> "BivariateQuadratic":
        n = np.linalg.norm(self.as_array())
        if n == 0:
            raise DegenerateSystem("quadratic is identically zero")
        return BivariateQuadratic.from_array(self.as_array() / n)


def companion_roots(coeffs) -> np.ndarray:
    """Roots of ``sum(coeffs[k] * x**k)`` as eigenvalues of the companion matrix."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if len(c) == 0:
        raise DegenerateSystem("zero polynomial has no isolated roots")
    scale = np.abs(c).max()
    # drop leading coefficients that are rounding noise (roots at infinity)
    while len(c) > 1 and abs(c[-1]) <= ZERO_TOL * scale:
        c = c[:-1]
    n = len(c) - 1
    if n == 0:
        return np.empty(0, dtype=complex)
    C = np.zeros((n, n))
    C[1:, :-1] = np.eye(n - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return np.linalg.eigvals(C)


def _coeffs_in_y(f: BivariateQuadratic) -> list[np.ndarray]:
    # coefficients of y^0, y^1, y^2 as polynomials in x (low to high)
    return [
        np.array([f.c00, f.c10, f.c20]),
        np.array([f.c01, f.c11]),
        np.array([f.c02]),
    ]


def _degree_in_y(coeffs: list[np.ndarray]) -> int:
    for d in (2, 1, 0):
        if np.abs(coeffs[d]).max() > ZERO_TOL:
            return d
    return -1


def _resultant_in_x(f: BivariateQuadratic, g: BivariateQuadratic) -> np.ndarray:
    """Resultant of f and g with respect to y; f and g must be unit-norm."""
    a = _coeffs_in_y(f)
    b = _coeffs_in_y(g)
    m, n = _degree_in_y(a), _degree_in_y(b)
    mul, sub = P.polymul, P.polysub
    if m < 0 or n < 0:
        raise DegenerateSystem("quadratic is identically zero")
    # a factor free of y enters with the other polynomial's degree as multiplicity
    if m == 0:
        return P.polypow(a[0], n)
    if n == 0:
        return P.polypow(b[0], m)
    if m == 1 and n == 1:
        return sub(mul(a[1], b[0]), mul(a[0], b[1]))
    if m == 2 and n == 1:
        return P.polyadd(
            sub(mul(a[2], mul(b[0], b[0])), mul(a[1], mul(b[0], b[1]))),
            mul(a[0], mul(b[1], b[1])),
        )
    if m == 1 and n == 2:
        return _resultant_in_x(g, f)
    d0 = sub(mul(a[2], b[0]), mul(a[0], b[2]))
    d1 = sub(mul(a[2], b[1]), mul(a[1], b[2]))
    d2 = sub(mul(a[1], b[0]), mul(a[0], b[1]))
    return sub(mul(d0, d0), mul(d1, d2))


def _is_zero(poly: np.ndarray) -> bool:
    return len(poly) == 0 or np.abs(poly).max() <= 1e3 * ZERO_TOL


def _y_candidates(f: BivariateQuadratic, g: BivariateQuadratic, x: float) -> list[complex]:
    ys: list[complex] = []
    for q in (f, g):
        # q(x, y) = c2 y^2 + c1 y + c0
        c0 = q.c20 * x * x + q.c10 * x + q.c00
        c1 = q.c11 * x + q.c01
        c2 = q.c02
        if abs(c2) > ZERO_TOL:
            disc = cmath.sqrt(c1 * c1 - 4 * c2 * c0)
            ys += [(-c1 + disc) / (2 * c2), (-c1 - disc) / (2 * c2)]
        elif abs(c1) > ZERO_TOL:
            ys.append(complex(-c0 / c1))
    return ys


def _newton(f, g, x, y, steps=NEWTON_STEPS):
    for _ in range(steps):
        fv, gv = f(x, y), g(x, y)
        fx, fy = f.gradient(x, y)
        gx, gy = g.gradient(x, y)
        det = fx * gy - fy * gx
        if abs(det) < 1e-300:
            break
        dx = (fv * gy - fy * gv) / det
        dy = (fx * gv - fv * gx) / det
        x, y = x - dx, y - dy
        if abs(dx) + abs(dy) <= 1e-16 * (1 + abs(x) + abs(y)):
            break
    return x, y


def _is_real(z: complex) -> bool:
    return abs(z.imag) <= IMAG_TOL * (1 + abs(z.real))


def _solve_hidden_y(f, g) -> list[tuple[float, float]]:
    res = _resultant_in_x(f, g)
    if _is_zero(res):
        raise DegenerateSystem("resultant vanishes identically")
    roots: list[tuple[float, float]] = []
    # each root of the resultant, counted with multiplicity, is the x of one
    # intersection; keep the y whose polish moved least (Newton may carry a
    # poor guess to some other intersection) and that is not already taken
    for xr in companion_roots(res):
        if not _is_real(xr):
            continue
        x = float(xr.real)
        polished = []
        for yc in _y_candidates(f, g, x):
            if not _is_real(complex(yc)):
                continue
            y = float(np.real(yc))
            if abs(f(x, y)) + abs(g(x, y)) > CANDIDATE_TOL * (1 + x * x + y * y):
                continue
            x2, y2 = _newton(f, g, x, y)
            r = max(abs(f(x2, y2)), abs(g(x2, y2)))
            if r <= RESIDUAL_TOL * (1 + x2 * x2 + y2 * y2):
                polished.append((abs(x2 - x) + abs(y2 - y), x2, y2))
        for _, x2, y2 in sorted(polished):
            if all(abs(x2 - xo) + abs(y2 - yo) > CLUSTER_TOL * (1 + abs(x2) + abs(y2)) for xo, yo in roots):
                roots.append((x2, y2))
                break
    # Bezout: two conics meet in at most four points
    return roots[:4]


def _balance(f: BivariateQuadratic, g: BivariateQuadratic) -> tuple[float, float]:
    # x -> sx * x and y -> sy * y chosen so the quadratic, linear and constant
    # terms have comparable magnitude; badly scaled unknowns otherwise make a
    # healthy resultant look identically zero
    def ratio(quad, const):
        return math.sqrt(const / quad) if quad > 0 and const > 0 else 1.0

    c00 = abs(f.c00) + abs(g.c00)
    sx = ratio(abs(f.c20) + abs(g.c20), c00)
    sy = ratio(abs(f.c02) + abs(g.c02), c00)
    return sx, sy


def _substitute(q: BivariateQuadratic, sx: float, sy: float) -> BivariateQuadratic:
    return BivariateQuadratic(
        q.c20 * sx * sx, q.c11 * sx * sy, q.c02 * sy * sy, q.c10 * sx, q.c01 * sy, q.c00
    ).scaled()


def solve_two_quadratics(f: BivariateQuadratic, g: BivariateQuadratic) -> list[tuple[float, float]]:
    """All real common roots ``(x, y)`` of two bivariate quadratics (at most four).

    Raises :class:`DegenerateSystem` when the system has a common factor, i.e.
    the resultant vanishes identically in both variable orders.
    """
    f, g = f.scaled(), g.scaled()
    sx, sy = _balance(f, g)
    fb, gb = _substitute(f, sx, sy), _substitute(g, sx, sy)
    try:
        roots = _solve_hidden_y(fb, gb)
    except DegenerateSystem:
        roots = [(x, y) for y, x in _solve_hidden_y(fb.swapped(), gb.swapped())]
    # undo the balancing and polish once more against the original system
    return [_newton(f, g, x * sx, y * sy) for x, y in roots]
