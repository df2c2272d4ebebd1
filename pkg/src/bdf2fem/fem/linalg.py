"""Conjugate gradients with diagonal scaling."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = ["SolverFailure", "cg_solve", "check_symmetric"]


class SolverFailure(RuntimeError):
    """Raised when CG cannot reach the requested residual."""

    def __init__(self, message: str, residual: float = float("nan"),
                 iterations: int = 0, step: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.step = step


def check_symmetric(A, rtol: float = 1e-14) -> bool:
    A = sp.csr_matrix(A)
    scale = abs(A).max() if A.nnz else 0.0
    if scale == 0.0:
        return True
    D = A - A.T
    return (abs(D).max() if D.nnz else 0.0) <= rtol * scale


def cg_solve(A, b, tol: float = 1e-12, maxit: int | None = None, x0=None,
             return_iterations: bool = False, check: bool = True):
    """Solve the SPD system ``A x = b`` to ``||A x - b|| <= tol ||b||``.

    Jacobi-preconditioned CG.  When the recurred residual meets the
    tolerance the true residual is recomputed; if it has drifted the
    iteration restarts from the current iterate.  A nonpositive curvature
    ``p^T A p`` or a nonpositive diagonal raises :class:`SolverFailure`
    instead of returning a wrong answer, as does exhausting ``maxit``
    (default ``10 n``).
    """
    A = sp.csr_matrix(A) if not sp.issparse(A) else A
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"shape mismatch: A is {A.shape}, b has {n} entries")
    if not tol > 0:
        raise ValueError("tol must be positive")
    maxit = 10 * max(n, 1) if maxit is None else int(maxit)
    if check and not check_symmetric(A):
        raise SolverFailure("matrix is not symmetric")

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        x[:] = 0.0
        return (x, 0) if return_iterations else x
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise SolverFailure("matrix has a nonpositive diagonal entry")
    dinv = 1.0 / diag
    target = tol * bnorm

    it = 0
    r = b - A @ x
    rnorm = float(np.linalg.norm(r))
    while rnorm > target:
        z = dinv * r
        p = z.copy()
        rz = float(r @ z)
        while it < maxit:
            it += 1
            Ap = A @ p
            curv = float(p @ Ap)
            if not curv > 0:
                raise SolverFailure("matrix is not positive definite",
                                    residual=rnorm / bnorm, iterations=it)
            alpha = rz / curv
            x += alpha * p
            r -= alpha * Ap
            rnorm = float(np.linalg.norm(r))
            if not np.isfinite(rnorm):
                raise SolverFailure("CG produced a non-finite residual", iterations=it)
            if rnorm <= target:
                break
            z = dinv * r
            rz_new = float(r @ z)
            p = z + (rz_new / rz) * p
            rz = rz_new
        true = b - A @ x
        true_norm = float(np.linalg.norm(true))
        if true_norm <= target:
            break
        if it >= maxit:
            raise SolverFailure(
                f"CG did not converge in {maxit} iterations "
                f"(relative residual {true_norm / bnorm:.3e})",
                residual=true_norm / bnorm, iterations=it)
        r, rnorm = true, true_norm
    return (x, it) if return_iterations else x
