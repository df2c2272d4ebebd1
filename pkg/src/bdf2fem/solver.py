"""Linearised variable-step BDF2 / P1 Galerkin time stepping.

Step ``n`` solves, on the interior unknowns,

    (b0 M + A - W) U^n = b0 M U^{n-1} - b1 M (U^{n-1} - U^{n-2})
                         + F_f(U^{n-1}) - W U^{n-1} + F_g(t_n)

where ``W`` is the mass matrix weighted by ``f'(U^{n-1})``.  Level 1 uses
backward Euler (``b1 = 0``).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .fem import (
    ACCURATE_DEGREE,
    FeFunction,
    SolverFailure,
    assemble_function_load,
    assemble_mass,
    assemble_stiffness,
    assemble_weighted_mass,
    cg_solve,
    l2_error,
    space,
)
from .kernels import bdf2_coefficients
from .mesh import Mesh
from .problems import ProblemSpec
from .timegrid import TimeGrid

__all__ = ["SolveOptions", "SolveResult", "BlowUpError", "SolverFailure", "run"]

log = logging.getLogger(__name__)


class BlowUpError(FloatingPointError):
    """The discrete solution stopped being finite."""

    def __init__(self, step: int):
        super().__init__(f"non-finite solution at step {step}")
        self.step = step


@dataclass(frozen=True)
class SolveOptions:
    cg_tol: float = 1e-12
    cg_maxit: int | None = None
    record_per_step_errors: bool = False

    def __post_init__(self):
        if not self.cg_tol > 0:
            raise ValueError("cg_tol must be positive")


@dataclass
class SolveResult:
    final_solution: FeFunction
    final_l2_error: float
    step_count: int
    cg_iterations_total: int
    wall_time: float
    per_step_l2_error: list[float] | None = None
    solutions: list[np.ndarray] = field(default_factory=list, repr=False)


def run(problem: ProblemSpec, grid: TimeGrid, mesh: Mesh,
        opts: SolveOptions | None = None, keep_solutions: bool = False) -> SolveResult:
    """Integrate ``problem`` over ``grid`` on ``mesh``.

    Raises :class:`SolverFailure` (with ``step`` set) when a linear solve
    fails and :class:`BlowUpError` if the iterate becomes non-finite.
    ``keep_solutions`` stores every interior iterate in the result.
    """
    opts = opts or SolveOptions()
    if problem.dim != mesh.dim:
        raise ValueError(f"problem is {problem.dim}-d but mesh is {mesh.dim}-d")
    start = time.perf_counter()
    coeffs = bdf2_coefficients(grid)
    M = assemble_mass(mesh)
    A = assemble_stiffness(mesh)
    fe = space(mesh)
    source = problem.source_at(fe.physical_points(ACCURATE_DEGREE))

    U0 = FeFunction.interpolate(mesh, problem.exact_u, 0.0)
    prev = U0.interior.copy()
    prev2 = prev
    history = [prev.copy()] if keep_solutions else []
    errors = [] if opts.record_per_step_errors else None
    iterations = 0
    current = FeFunction.from_interior(mesh, prev)

    for n in range(1, grid.N + 1):
        b0 = coeffs.b0[n - 1]
        b1 = coeffs.b1[n - 1]
        tn = float(grid.levels[n])
        W = assemble_weighted_mass(mesh, current, problem.f_prime)
        rhs = M @ (b0 * prev - b1 * (prev - prev2))
        rhs += assemble_function_load(mesh, current, problem.f)
        rhs -= W @ prev
        rhs += fe.load(fe.local_load(source(tn), ACCURATE_DEGREE))
        K = b0 * M + A - W
        try:
            new, its = cg_solve(K, rhs, tol=opts.cg_tol, maxit=opts.cg_maxit,
                                x0=prev, return_iterations=True)
        except SolverFailure as exc:
            exc.step = n
            raise
        if not np.all(np.isfinite(new)):
            raise BlowUpError(n)
        iterations += its
        prev2, prev = prev, new
        current = FeFunction.from_interior(mesh, prev)
        if keep_solutions:
            history.append(prev.copy())
        if errors is not None:
            errors.append(_checked(l2_error(mesh, current, problem.exact_u, tn), n))

    final = errors[-1] if errors else _checked(
        l2_error(mesh, current, problem.exact_u, float(grid.levels[-1])), grid.N)
    wall = time.perf_counter() - start
    log.debug("solved %s N=%d M=%d err=%.4e cg=%d in %.2fs",
              problem.name, grid.N, mesh.M, final, iterations, wall)
    return SolveResult(current, final, grid.N, iterations, wall, errors, history)


def _checked(value: float, step: int) -> float:
    if not np.isfinite(value):
        raise BlowUpError(step)
    return value
