"""Gauss quadrature on the reference triangle and the reference edge.

The reference triangle has vertices (0,0), (1,0), (0,1) and area 1/2; the
reference edge is [0, 1]. All rules have positive weights.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

__all__ = ["QuadRule", "triangle_rule", "edge_rule", "MAX_DEGREE"]

MAX_DEGREE = 30


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Points and weights of a quadrature rule.

    `points` has shape (nq, 2) for triangle rules and (nq,) for edge rules.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __len__(self):
        return len(self.weights)


def _check_degree(degree):
    if int(degree) != degree or not 1 <= degree <= MAX_DEGREE:
        raise ValueError(f"unsupported quadrature degree {degree!r} (1..{MAX_DEGREE})")
    return int(degree)


def _frozen(points, weights, degree):
    points = np.ascontiguousarray(points, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadRule(points, weights, degree)


@lru_cache(maxsize=None)
def triangle_rule(degree):
    """Rule exact for bivariate polynomials of total degree <= `degree`.

    Degrees 1 and 2 use the centroid and edge-midpoint rules. Higher
    degrees use a collapsed (Duffy) product of Gauss-Jacobi and
    Gauss-Legendre points.
    """
    degree = _check_degree(degree)
    if degree == 1:
        return _frozen([[1 / 3, 1 / 3]], [0.5], 1)
    if degree == 2:
        return _frozen([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]], [1 / 6] * 3, 2)

    m = (degree + 2) // 2
    # x-direction carries the Jacobian factor (1 - x) as Jacobi weight
    xi, wx = roots_jacobi(m, 1.0, 0.0)
    eta, wy = np.polynomial.legendre.leggauss(m)
    x = 0.5 * (1.0 + xi)
    s = 0.5 * (1.0 + eta)
    X, S = np.meshgrid(x, s, indexing="ij")
    points = np.column_stack([X.ravel(), (S * (1.0 - X)).ravel()])
    weights = (np.outer(wx, wy) / 8.0).ravel()
    return _frozen(points, weights, degree)


@lru_cache(maxsize=None)
def edge_rule(degree):
    """Gauss-Legendre rule on [0, 1] exact for polynomials of degree <= `degree`."""
    degree = _check_degree(degree)
    m = (degree + 2) // 2
    t, w = np.polynomial.legendre.leggauss(m)
    return _frozen(0.5 * (1.0 + t), 0.5 * w, degree)
