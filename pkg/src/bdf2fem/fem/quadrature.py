"""Quadrature on the reference triangle and tetrahedron.

Points are barycentric coordinates; weights sum to the reference volume
(1/2 for the triangle, 1/6 for the tetrahedron).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

__all__ = ["QuadratureRule", "quadrature_rule", "collapsed_gauss", "reference_volume"]


def reference_volume(dim: int) -> float:
    return 1.0 / math.factorial(dim)


@dataclass(frozen=True)
class QuadratureRule:
    dim: int
    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def num_points(self) -> int:
        return len(self.weights)

    @property
    def normalized_weights(self) -> np.ndarray:
        """Weights rescaled to sum to one, ready to multiply a cell volume."""
        return self.weights / reference_volume(self.dim)

    def cartesian_points(self) -> np.ndarray:
        """Points on the reference simplex spanned by the unit vectors."""
        return self.points[:, 1:]


def _edge_midpoints() -> QuadratureRule:
    pts = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
    return QuadratureRule(2, pts, np.full(3, 1.0 / 6.0), 2)


def _tet_four_point() -> QuadratureRule:
    a = (5.0 + 3.0 * math.sqrt(5.0)) / 20.0
    b = (5.0 - math.sqrt(5.0)) / 20.0
    pts = np.full((4, 4), b)
    np.fill_diagonal(pts, a)
    return QuadratureRule(3, pts, np.full(4, 1.0 / 24.0), 2)


def _jacobi01(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    # Gauss-Jacobi on [0, 1] for weight (1 - u)^alpha
    s, w = roots_jacobi(n, alpha, 0.0)
    return (1.0 + s) / 2.0, w / 2.0 ** (alpha + 1.0)


def collapsed_gauss(dim: int, degree: int) -> QuadratureRule:
    """Conical-product Gauss-Jacobi rule exact for polynomials of ``degree``.

    The reference simplex is parametrised by the Duffy map
    ``x1 = u1, x2 = (1 - u1) u2, x3 = (1 - u1)(1 - u2) u3``; the Jacobian
    factors are absorbed into Gauss-Jacobi weights, one 1-d rule per axis.
    """
    n = max(1, math.ceil((degree + 1) / 2))
    rules = [_jacobi01(n, float(dim - 1 - axis)) for axis in range(dim)]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrid = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    w = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1)
    x = np.empty_like(u)
    remaining = np.ones(len(u))
    for axis in range(dim):
        x[:, axis] = remaining * u[:, axis]
        remaining = remaining * (1.0 - u[:, axis])
    bary = np.concatenate([(1.0 - x.sum(axis=1))[:, None], x], axis=1)
    return QuadratureRule(dim, bary, w, degree)


@lru_cache(maxsize=None)
def quadrature_rule(dim: int, degree: int) -> QuadratureRule:
    """Cheapest available rule on the ``dim``-simplex of at least ``degree``."""
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim!r}")
    if degree <= 2:
        return _edge_midpoints() if dim == 2 else _tet_four_point()
    return collapsed_gauss(dim, degree)
