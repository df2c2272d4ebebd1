"""P1 finite elements: quadrature, assembly, error norms and CG."""

from .assembly import (
    ACCURATE_DEGREE,
    NONLINEAR_DEGREE,
    AssemblyError,
    FeFunction,
    P1Space,
    assemble_function_load,
    assemble_mass,
    assemble_source_load,
    assemble_stiffness,
    assemble_weighted_mass,
    l2_error,
    space,
)
from .linalg import SolverFailure, cg_solve, check_symmetric
from .quadrature import QuadratureRule, collapsed_gauss, quadrature_rule, reference_volume

__all__ = [
    "ACCURATE_DEGREE",
    "NONLINEAR_DEGREE",
    "AssemblyError",
    "FeFunction",
    "P1Space",
    "QuadratureRule",
    "SolverFailure",
    "assemble_function_load",
    "assemble_mass",
    "assemble_source_load",
    "assemble_stiffness",
    "assemble_weighted_mass",
    "cg_solve",
    "check_symmetric",
    "collapsed_gauss",
    "l2_error",
    "quadrature_rule",
    "reference_volume",
    "space",
]
