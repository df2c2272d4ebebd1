"""Linearised variable-step BDF2 with P1 finite elements for semilinear heat equations."""

from .kernels import rmax
from .mesh import unit_cube_mesh, unit_mesh, unit_square_mesh
from .problems import example_2d, example_3d, get_problem
from .solver import SolveOptions, SolveResult, run
from .timegrid import GridMode, GridPolicy, random_grid, uniform_grid, validate

__version__ = "0.1.0"

__all__ = [
    "GridMode",
    "GridPolicy",
    "SolveOptions",
    "SolveResult",
    "example_2d",
    "example_3d",
    "get_problem",
    "random_grid",
    "rmax",
    "run",
    "uniform_grid",
    "unit_cube_mesh",
    "unit_mesh",
    "unit_square_mesh",
    "validate",
]
