"""Manufactured solutions for ``u_t = Laplace(u) + f(u) + g`` on the unit box.

Every callable is vectorised: points are arrays whose last axis holds the
coordinates, and nonlinearities act elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["ProblemSpec", "source", "example_2d", "example_3d", "heat", "PROBLEMS", "get_problem"]


@dataclass(frozen=True)
class ProblemSpec:
    """Nonlinearity, exact solution and its derivatives.

    Solutions of the form ``a(t) s(x)`` may also supply ``time_factor``
    (returning ``a`` and ``a'``), ``spatial`` and ``spatial_lap`` so that
    :meth:`source_at` can evaluate the space part once per point set.
    """

    name: str
    dim: int
    f: Callable
    f_prime: Callable
    exact_u: Callable
    exact_ut: Callable
    exact_lap_u: Callable
    time_factor: Callable | None = None
    spatial: Callable | None = None
    spatial_lap: Callable | None = None

    def source(self, x, t):
        return source(self, x, t)

    def initial(self, x):
        return self.exact_u(x, 0.0)

    def source_at(self, x) -> Callable:
        """``t -> g(x, t)`` for a fixed point array ``x``."""
        if self.time_factor is None:
            return lambda t: source(self, x, t)
        s = self.spatial(x)
        lap = self.spatial_lap(x)
        f = self.f

        def g(t):
            a, da = self.time_factor(t)
            return da * s - a * lap - f(a * s)

        return g


def source(problem: ProblemSpec, x, t):
    """Right-hand side ``g`` that makes ``exact_u`` solve the equation."""
    u = problem.exact_u(x, t)
    return problem.exact_ut(x, t) - problem.exact_lap_u(x, t) - problem.f(u)


# s(x) = prod_i q(x_i) with q(y) = y (1 - y)^2; time factor 1 + t^3
def _q(y):
    return y * (1.0 - y) ** 2


def _q2(y):
    return 6.0 * y - 4.0


def _spatial(x):
    x = np.asarray(x, dtype=float)
    out = _q(x[..., 0])
    for i in range(1, x.shape[-1]):
        out = out * _q(x[..., i])
    return out


def _spatial_laplacian(x):
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    q = [_q(x[..., i]) for i in range(d)]
    total = 0.0
    for i in range(d):
        term = _q2(x[..., i])
        for j in range(d):
            if j != i:
                term = term * q[j]
        total = total + term
    return total


def _cubic_growth(t):
    return 1.0 + t**3, 3.0 * t**2


def _product_solution(name: str, dim: int, f, f_prime) -> ProblemSpec:
    def exact_u(x, t):
        return (1.0 + t**3) * _spatial(x)

    def exact_ut(x, t):
        return 3.0 * t**2 * _spatial(x)

    def exact_lap_u(x, t):
        return (1.0 + t**3) * _spatial_laplacian(x)

    return ProblemSpec(name, dim, f, f_prime, exact_u, exact_ut, exact_lap_u,
                       _cubic_growth, _spatial, _spatial_laplacian)


def example_2d() -> ProblemSpec:
    """``f(u) = sqrt(1 + u^2)`` on the unit square."""
    return _product_solution(
        "example51", 2,
        lambda u: np.sqrt(1.0 + u * u),
        lambda u: u / np.sqrt(1.0 + u * u),
    )


def example_3d() -> ProblemSpec:
    """``f(u) = u - u^3`` on the unit cube."""
    return _product_solution(
        "example52", 3,
        lambda u: u - u**3,
        lambda u: 1.0 - 3.0 * u * u,
    )


def heat(dim: int = 2) -> ProblemSpec:
    """Linear heat equation with the zero solution."""

    def zero(x, t):
        return np.zeros(np.shape(x)[:-1])

    return ProblemSpec(
        "heat", dim,
        lambda u: np.zeros_like(u),
        lambda u: np.zeros_like(u),
        zero, zero, zero,
    )


PROBLEMS: dict[str, Callable[[], ProblemSpec]] = {
    "example51": example_2d,
    "example52": example_3d,
    "heat": heat,
}


def get_problem(name: str) -> ProblemSpec:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
