"""Dense, loop-based reference implementations used as test oracles.

Everything here is written cell by cell with plain numpy linear algebra.
Only the quadrature tables are shared with the library, so that both
sides integrate the nonlinear terms with the same points.
"""

import numpy as np

from bdf2fem.fem.quadrature import quadrature_rule, reference_volume


def cell_geometry(x):
    """Volume and barycentric gradients of a simplex with vertex rows ``x``."""
    d = x.shape[1]
    # rows (1, x_a): solving gives coefficients of the affine barycentrics
    T = np.hstack([np.ones((d + 1, 1)), x])
    C = np.linalg.inv(T)
    vol = abs(np.linalg.det(T)) * reference_volume(d)
    return vol, C[1:, :].T


def dense_operators(mesh, degree=4):
    n = mesh.num_vertices
    M = np.zeros((n, n))
    A = np.zeros((n, n))
    for cell in mesh.cells:
        vol, grads = cell_geometry(mesh.vertices[cell])
        rule = quadrature_rule(mesh.dim, degree)
        for lam, w in zip(rule.points, rule.weights / reference_volume(mesh.dim)):
            for a in range(len(cell)):
                for b in range(len(cell)):
                    M[cell[a], cell[b]] += vol * w * lam[a] * lam[b]
        for a in range(len(cell)):
            for b in range(len(cell)):
                A[cell[a], cell[b]] += vol * grads[a] @ grads[b]
    return M, A


def dense_nonlinear(mesh, U, f, fp, degree=2):
    """Weighted mass ``int f'(U) phi_i phi_j`` and load ``int f(U) phi_i``."""
    n = mesh.num_vertices
    W = np.zeros((n, n))
    F = np.zeros(n)
    rule = quadrature_rule(mesh.dim, degree)
    for cell in mesh.cells:
        vol, _ = cell_geometry(mesh.vertices[cell])
        for lam, w in zip(rule.points, rule.weights / reference_volume(mesh.dim)):
            u = float(lam @ U[cell])
            for a in range(len(cell)):
                F[cell[a]] += vol * w * f(u) * lam[a]
                for b in range(len(cell)):
                    W[cell[a], cell[b]] += vol * w * fp(u) * lam[a] * lam[b]
    return W, F


def dense_source(mesh, problem, t, degree=4):
    F = np.zeros(mesh.num_vertices)
    rule = quadrature_rule(mesh.dim, degree)
    for cell in mesh.cells:
        x = mesh.vertices[cell]
        vol, _ = cell_geometry(x)
        for lam, w in zip(rule.points, rule.weights / reference_volume(mesh.dim)):
            g = float(problem.source(lam @ x, t))
            for a in range(len(cell)):
                F[cell[a]] += vol * w * g * lam[a]
    return F


def dense_bdf2_solve(problem, grid, mesh):
    """Linearised BDF2 (BDF1 first step) with dense matrices and direct solves.

    Returns the list of full nodal vectors ``U^0 .. U^N``.
    """
    M, A = dense_operators(mesh)
    inner = ~mesh.is_boundary
    U0 = np.array([problem.exact_u(x, 0.0) for x in mesh.vertices], dtype=float)
    U0[mesh.is_boundary] = 0.0
    history = [U0]
    for n in range(1, grid.N + 1):
        tau = grid.steps[n - 1]
        prev = history[-1]
        if n == 1:
            b0, b1, prev2 = 1.0 / tau, 0.0, prev
        else:
            r = tau / grid.steps[n - 2]
            b0 = (1 + 2 * r) / (tau * (1 + r))
            b1 = -r * r / (tau * (1 + r))
            prev2 = history[-2]
        W, Ff = dense_nonlinear(mesh, prev, problem.f, problem.f_prime)
        G = dense_source(mesh, problem, grid.levels[n])
        K = b0 * M + A - W
        rhs = M @ (b0 * prev - b1 * (prev - prev2)) + Ff - W @ prev + G
        U = np.zeros_like(prev)
        U[inner] = np.linalg.solve(K[np.ix_(inner, inner)], rhs[inner])
        history.append(U)
    return history
