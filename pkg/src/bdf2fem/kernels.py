"""Variable-step BDF2 convolution coefficients and their DOC/DCC kernels.

All tables are 0-based lower-triangular ``(N, N)`` arrays: entry
``[n-1, j-1]`` holds the kernel weight that level ``j`` receives in row
``n`` (``theta^{(n)}_{n-j}`` and ``p^{(n)}_{n-j}``).  Level ``n`` uses BDF1
when ``n = 1`` and the two-term variable BDF2 formula otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "rmax",
    "Bdf2Coefficients",
    "DocKernels",
    "DccKernels",
    "bdf2_coefficients",
    "convolution_matrix",
    "apply_d2",
    "doc_kernels",
    "dcc_kernels",
    "quadratic_form_b",
    "quadratic_form_theta",
    "d2_truncation_residual",
    "orthogonality_residual",
    "complementary_residual",
    "relation_residual",
]


def rmax() -> float:
    """Real root of ``x**3 = (1 + 2x)**2``, the critical adjacent-step ratio."""
    s = 12.0 * math.sqrt(177.0)
    return (np.cbrt(1196.0 - s) + np.cbrt(1196.0 + s)) / 6.0 + 4.0 / 3.0


@dataclass(frozen=True)
class Bdf2Coefficients:
    """``b0[n-1]`` multiplies ``u^n - u^{n-1}``, ``b1[n-1]`` multiplies
    ``u^{n-1} - u^{n-2}``; ``b1[0]`` is 0 because level 1 is BDF1."""

    b0: np.ndarray
    b1: np.ndarray
    steps: np.ndarray

    @property
    def N(self) -> int:
        return len(self.b0)


@dataclass(frozen=True)
class DocKernels:
    theta: np.ndarray
    steps: np.ndarray

    @property
    def N(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class DccKernels:
    p: np.ndarray
    steps: np.ndarray

    @property
    def N(self) -> int:
        return self.p.shape[0]


def bdf2_coefficients(grid) -> Bdf2Coefficients:
    tau = np.asarray(grid.steps, dtype=float)
    r = np.asarray(grid.ratios, dtype=float)
    b0 = np.empty_like(tau)
    b1 = np.zeros_like(tau)
    b0[0] = 1.0 / tau[0]
    rn, tn = r[1:], tau[1:]
    b0[1:] = (1.0 + 2.0 * rn) / (tn * (1.0 + rn))
    b1[1:] = -(rn**2) / (tn * (1.0 + rn))
    return Bdf2Coefficients(b0, b1, tau)


def convolution_matrix(coeffs: Bdf2Coefficients) -> np.ndarray:
    """Dense lower-bidiagonal matrix ``B[n-1, k-1] = b^{(n)}_{n-k}``."""
    B = np.diag(coeffs.b0)
    if coeffs.N > 1:
        B[np.arange(1, coeffs.N), np.arange(coeffs.N - 1)] = coeffs.b1[1:]
    return B


def apply_d2(coeffs: Bdf2Coefficients, values) -> np.ndarray:
    """Apply the BDF1/BDF2 difference operator to ``values[0..N]``.

    ``values`` may carry trailing axes (one vector per level); the result
    has leading length N with entry ``n-1`` approximating ``u'(t_n)``.
    """
    u = np.asarray(values, dtype=float)
    if u.shape[0] != coeffs.N + 1:
        raise ValueError(f"expected {coeffs.N + 1} levels, got {u.shape[0]}")
    du = np.diff(u, axis=0)
    shape = (-1,) + (1,) * (u.ndim - 1)
    d = coeffs.b0.reshape(shape) * du
    d[1:] += coeffs.b1[1:].reshape(shape) * du[:-1]
    return d


def doc_kernels(coeffs: Bdf2Coefficients) -> DocKernels:
    """Discrete orthogonal convolution kernels.

    The diagonal is ``1 / b0[n]``; moving left along a row,
    ``theta[n, k] = -theta[n, k+1] * b1[k+1] / b0[k]`` (1-based levels),
    which is forward substitution on the bidiagonal system.  Each column
    step is vectorised over every row that contains it.
    """
    b0, b1 = coeffs.b0, coeffs.b1
    if np.any(b0 <= 0):
        raise ValueError("leading BDF coefficients must be positive")
    N = coeffs.N
    theta = np.zeros((N, N))
    theta[np.arange(N), np.arange(N)] = 1.0 / b0
    # factor linking column c+1 to column c (0-based)
    link = -b1[1:] / b0[:-1]
    for c in range(N - 2, -1, -1):
        theta[c + 1 :, c] = theta[c + 1 :, c + 1] * link[c]
    return DocKernels(theta, coeffs.steps)


def dcc_kernels(doc: DocKernels) -> DccKernels:
    """Complementary kernels as column-wise partial sums of the DOC table."""
    p = np.tril(np.cumsum(doc.theta, axis=0))
    return DccKernels(p, doc.steps)


def quadratic_form_b(coeffs: Bdf2Coefficients, w) -> float:
    """``2 * sum_k w_k * sum_{j<=k} b^{(k)}_{k-j} w_j`` over the first n levels."""
    w = np.asarray(w, dtype=float)
    n = len(w)
    if n < 1 or n > coeffs.N:
        raise ValueError("w must have between 1 and N entries")
    inner = coeffs.b0[:n] * w
    inner[1:] += coeffs.b1[1:n] * w[:-1]
    return float(2.0 * np.dot(w, inner))


def quadratic_form_theta(doc: DocKernels, w) -> float:
    w = np.asarray(w, dtype=float)
    n = len(w)
    if n < 1 or n > doc.N:
        raise ValueError("w must have between 1 and N entries")
    return float(w @ (doc.theta[:n, :n] @ w))


def d2_truncation_residual(grid, fn, dfn, exact: bool = True) -> np.ndarray:
    """Consistency error of the difference operator on a scalar function.

    Returns ``R[n-1] = (D2 fn)(t_n) - dfn(t_n)`` for n = 1..N.  With
    ``exact`` the operator is evaluated in rational arithmetic on the grid
    defined by its steps, whenever ``fn`` and ``dfn`` accept
    :class:`fractions.Fraction` (polynomials do).  In floating point the
    differences ``fn(t_n) - fn(t_{n-1})`` lose about ``eps / tau_n`` to
    cancellation, which swamps the true residual on very small steps.
    """
    if exact:
        try:
            return _exact_truncation(grid, fn, dfn)
        except TypeError:
            pass
    t = np.asarray(grid.levels, dtype=float)
    samples = np.array([fn(tk) for tk in t], dtype=float)
    slopes = np.array([dfn(tk) for tk in t[1:]], dtype=float)
    return apply_d2(bdf2_coefficients(grid), samples) - slopes


def _exact_truncation(grid, fn, dfn) -> np.ndarray:
    tau = [Fraction(float(x)) for x in grid.steps]
    t = [Fraction(0)]
    for x in tau:
        t.append(t[-1] + x)
    u = [fn(tk) for tk in t]
    if not all(isinstance(v, (Fraction, int)) for v in u):
        raise TypeError("fn does not preserve rationals")
    out = np.empty(len(tau))
    for n in range(1, len(tau) + 1):
        k = tau[n - 1]
        slope = dfn(t[n])
        if not isinstance(slope, (Fraction, int)):
            raise TypeError("dfn does not preserve rationals")
        if n == 1:
            d = (u[1] - u[0]) / k
        else:
            r = k / tau[n - 2]
            d = ((1 + 2 * r) * (u[n] - u[n - 1]) - r * r * (u[n - 1] - u[n - 2])) / (k * (1 + r))
        out[n - 1] = float(d - slope)
    return out


def _row_scale(coeffs: Bdf2Coefficients) -> np.ndarray:
    return np.maximum(1.0, np.abs(coeffs.b0) * coeffs.steps)


def orthogonality_residual(coeffs: Bdf2Coefficients, doc: DocKernels) -> float:
    """Max scaled deviation of ``sum_j theta^{(n)}_{n-j} b^{(j)}_{j-k}`` from delta."""
    R = doc.theta @ convolution_matrix(coeffs) - np.eye(coeffs.N)
    return float(np.max(np.abs(np.tril(R)) / _row_scale(coeffs)[:, None]))


def complementary_residual(coeffs: Bdf2Coefficients, dcc: DccKernels) -> float:
    """Max scaled deviation of ``sum_j p^{(n)}_{n-j} b^{(j)}_{j-k}`` from 1."""
    R = np.tril(dcc.p @ convolution_matrix(coeffs)) - np.tril(np.ones((coeffs.N, coeffs.N)))
    return float(np.max(np.abs(R) / _row_scale(coeffs)[:, None]))


def relation_residual(doc: DocKernels, dcc: DccKernels) -> float:
    """Max of ``|theta^{(n)}_{n-j} - (p^{(n)}_{n-j} - p^{(n-1)}_{n-1-j})|``."""
    prev = np.zeros_like(dcc.p)
    prev[1:] = dcc.p[:-1]
    return float(np.max(np.abs(np.tril(doc.theta - (dcc.p - prev)))))
