import numpy as np
import pytest

from bdf2fem.fem import SolverFailure
from bdf2fem.mesh import unit_cube_mesh, unit_square_mesh
from bdf2fem.problems import example_2d, example_3d, heat
from bdf2fem.solver import SolveOptions, run
from bdf2fem.timegrid import GridPolicy, random_grid, uniform_grid

from oracles import dense_bdf2_solve


def _interior_history(mesh, history):
    return [u[mesh.interior_vertices] for u in history]


def test_heat_zero_is_a_fixed_point():
    mesh = unit_square_mesh(6)
    grid = random_grid(1.0, 12, GridPolicy("uncapped", seed=2))
    res = run(heat(), grid, mesh, keep_solutions=True)
    assert res.final_l2_error == 0.0
    assert all(np.all(u == 0) for u in res.solutions)
    assert res.step_count == 12


@pytest.mark.parametrize(
    "problem,mesh,grid",
    [
        (example_2d(), unit_square_mesh(3), random_grid(1.0, 4, GridPolicy("capped", seed=9))),
        (example_2d(), unit_square_mesh(4), uniform_grid(0.5, 1)),
        (example_3d(), unit_cube_mesh(3), random_grid(1.0, 3, GridPolicy("uncapped", seed=1))),
    ],
    ids=["2d-capped", "2d-backward-euler", "3d-uncapped"],
)
def test_matches_dense_oracle(problem, mesh, grid):
    res = run(problem, grid, mesh, SolveOptions(cg_tol=1e-14), keep_solutions=True)
    ref = _interior_history(mesh, dense_bdf2_solve(problem, grid, mesh))
    assert len(res.solutions) == grid.N + 1
    for got, want in zip(res.solutions, ref):
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-10)


def test_deterministic():
    mesh = unit_square_mesh(8)
    grid = random_grid(1.0, 6, GridPolicy("capped", seed=3))
    a = run(example_2d(), grid, mesh)
    b = run(example_2d(), grid, mesh)
    np.testing.assert_array_equal(a.final_solution.values, b.final_solution.values)
    assert a.final_l2_error == b.final_l2_error
    assert a.cg_iterations_total == b.cg_iterations_total


def test_per_step_errors_recorded():
    mesh = unit_square_mesh(6)
    grid = uniform_grid(1.0, 5)
    res = run(example_2d(), grid, mesh, SolveOptions(record_per_step_errors=True))
    assert len(res.per_step_l2_error) == 5
    assert res.per_step_l2_error[-1] == res.final_l2_error
    assert all(np.isfinite(res.per_step_l2_error))


def test_error_decreases_with_refinement():
    errs = []
    for M in (4, 8, 16):
        grid = random_grid(1.0, M, GridPolicy("capped", seed=M))
        errs.append(run(example_2d(), grid, unit_square_mesh(M)).final_l2_error)
    assert errs[0] > errs[1] > errs[2]
    assert np.log2(errs[1] / errs[2]) > 1.6


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        run(example_3d(), uniform_grid(1.0, 2), unit_square_mesh(3))


def test_solver_failure_carries_step():
    with pytest.raises(SolverFailure) as info:
        run(example_2d(), uniform_grid(1.0, 3), unit_square_mesh(10),
            SolveOptions(cg_maxit=1))
    assert info.value.step == 1


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(cg_tol=0.0)
