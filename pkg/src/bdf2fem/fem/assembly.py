"""P1 Lagrange assembly on simplicial meshes with homogeneous Dirichlet data.

Global operators live on the interior vertices only; boundary rows and
columns are dropped, which is exact for zero boundary values.  Assembly is
vectorised over cells and scattered with ``np.bincount`` into a sparsity
pattern computed once per mesh, so repeated assembly reuses the pattern
and sums contributions in a fixed order.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..mesh import Mesh
from .quadrature import QuadratureRule, quadrature_rule

__all__ = [
    "AssemblyError",
    "FeFunction",
    "P1Space",
    "space",
    "assemble_stiffness",
    "assemble_mass",
    "assemble_weighted_mass",
    "assemble_function_load",
    "assemble_source_load",
    "l2_error",
    "NONLINEAR_DEGREE",
    "ACCURATE_DEGREE",
]

# nonlinear terms only need to match the O(h^2) P1 accuracy
NONLINEAR_DEGREE = 2
# sources and error norms: keep quadrature noise under the discretisation error
ACCURATE_DEGREE = 4


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FeFunction:
    """Nodal values of a P1 function at every vertex of ``mesh``."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.num_vertices,):
            raise ValueError("one nodal value per vertex is required")
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "FeFunction":
        return cls(mesh, np.zeros(mesh.num_vertices))

    @classmethod
    def from_interior(cls, mesh: Mesh, interior) -> "FeFunction":
        v = np.zeros(mesh.num_vertices)
        v[mesh.interior_vertices] = interior
        return cls(mesh, v)

    @classmethod
    def interpolate(cls, mesh: Mesh, func, t: float | None = None) -> "FeFunction":
        """Nodal interpolant of ``func(x)`` (or ``func(x, t)``), zeroed on the boundary."""
        x = mesh.vertices
        v = np.asarray(func(x) if t is None else func(x, t), dtype=float)
        v = np.broadcast_to(v, (mesh.num_vertices,)).copy()
        v[mesh.is_boundary] = 0.0
        return cls(mesh, v)

    @property
    def interior(self) -> np.ndarray:
        return self.values[self.mesh.interior_vertices]


class _Pattern:
    """CSR sparsity of all vertex pairs sharing a cell, restricted to a dof set."""

    def __init__(self, cells: np.ndarray, dof: np.ndarray, n: int):
        k = cells.shape[1]
        rows = np.repeat(dof[cells], k, axis=1).reshape(-1, k, k)
        cols = np.tile(dof[cells], k).reshape(-1, k, k)
        self.mask = ((rows >= 0) & (cols >= 0)).ravel()
        keys = (rows.ravel() * n + cols.ravel())[self.mask]
        unique, self.slot = np.unique(keys, return_inverse=True)
        self.n = n
        self.nnz = len(unique)
        self.indices = (unique % n).astype(np.int32)
        row_of = unique // n
        self.indptr = np.searchsorted(row_of, np.arange(n + 1)).astype(np.int32)

    def build(self, local: np.ndarray) -> sp.csr_matrix:
        data = np.bincount(self.slot, weights=local.ravel()[self.mask], minlength=self.nnz)
        return sp.csr_matrix((data, self.indices.copy(), self.indptr.copy()),
                             shape=(self.n, self.n))


class _Loads:
    def __init__(self, cells: np.ndarray, dof: np.ndarray, n: int):
        d = dof[cells].ravel()
        self.mask = d >= 0
        self.slot = d[self.mask]
        self.n = n

    def build(self, local: np.ndarray) -> np.ndarray:
        return np.bincount(self.slot, weights=local.ravel()[self.mask], minlength=self.n)


class P1Space:
    """Per-mesh geometry, quadrature caches and scatter maps."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        d = mesh.dim
        x = mesh.vertices[mesh.cells]
        jac = np.transpose(x[:, 1:, :] - x[:, :1, :], (0, 2, 1))
        det = np.linalg.det(jac)
        fact = float(np.prod(np.arange(1, d + 1)))
        self.volumes = det / fact
        if np.any(self.volumes <= 1e-12 * np.abs(self.volumes).mean()):
            bad = int(np.argmin(self.volumes))
            raise AssemblyError(f"cell {bad} is degenerate or inverted "
                                f"(volume {self.volumes[bad]:.3e})")
        inv = np.linalg.inv(jac)
        g = np.empty((mesh.num_cells, d + 1, d))
        g[:, 1:, :] = inv
        g[:, 0, :] = -inv.sum(axis=1)
        self.gradients = g
        n = mesh.num_interior
        self._interior = _Pattern(mesh.cells, mesh.interior_index, n)
        self._interior_loads = _Loads(mesh.cells, mesh.interior_index, n)
        self._full = None
        self._points = {}

    # -- quadrature helpers ---------------------------------------------
    def rule(self, degree: int) -> QuadratureRule:
        return quadrature_rule(self.mesh.dim, degree)

    def physical_points(self, degree: int) -> np.ndarray:
        """Quadrature points of every cell, shape ``(cells, points, dim)``."""
        if degree not in self._points:
            rule = self.rule(degree)
            x = self.mesh.vertices[self.mesh.cells]
            self._points[degree] = np.einsum("qa,cad->cqd", rule.points, x)
        return self._points[degree]

    def evaluate(self, w, degree: int) -> np.ndarray:
        """Values of the P1 function ``w`` at quadrature points, ``(cells, points)``."""
        vals = _nodal(w)[self.mesh.cells]
        return vals @ self.rule(degree).points.T

    def matrix_pattern(self, full: bool) -> _Pattern:
        if not full:
            return self._interior
        if self._full is None:
            nv = self.mesh.num_vertices
            self._full = _Pattern(self.mesh.cells, np.arange(nv), nv)
        return self._full

    # -- local operators --------------------------------------------------
    def local_stiffness(self) -> np.ndarray:
        g = self.gradients
        return self.volumes[:, None, None] * np.einsum("cad,cbd->cab", g, g)

    def local_mass(self) -> np.ndarray:
        d = self.mesh.dim
        ref = (np.ones((d + 1, d + 1)) + np.eye(d + 1)) / ((d + 1) * (d + 2))
        return self.volumes[:, None, None] * ref[None]

    def local_weighted_mass(self, weights_at_points: np.ndarray, degree: int) -> np.ndarray:
        rule = self.rule(degree)
        wq = self.volumes[:, None] * rule.normalized_weights[None, :] * weights_at_points
        lam = rule.points
        k = lam.shape[1]
        outer = (lam[:, :, None] * lam[:, None, :]).reshape(len(lam), k * k)
        return (wq @ outer).reshape(-1, k, k)

    def local_load(self, values_at_points: np.ndarray, degree: int) -> np.ndarray:
        rule = self.rule(degree)
        wq = self.volumes[:, None] * rule.normalized_weights[None, :] * values_at_points
        return wq @ rule.points

    # -- global assembly --------------------------------------------------
    def matrix(self, local: np.ndarray, full: bool = False) -> sp.csr_matrix:
        return self.matrix_pattern(full).build(local)

    def load(self, local: np.ndarray) -> np.ndarray:
        return self._interior_loads.build(local)


_SPACES: "weakref.WeakKeyDictionary[Mesh, P1Space]" = weakref.WeakKeyDictionary()


def space(mesh: Mesh) -> P1Space:
    """Cached :class:`P1Space` for ``mesh``."""
    s = _SPACES.get(mesh)
    if s is None:
        s = _SPACES[mesh] = P1Space(mesh)
    return s


def _nodal(w) -> np.ndarray:
    return w.values if isinstance(w, FeFunction) else np.asarray(w, dtype=float)


def assemble_stiffness(mesh: Mesh, full: bool = False) -> sp.csr_matrix:
    s = space(mesh)
    return s.matrix(s.local_stiffness(), full)


def assemble_mass(mesh: Mesh, full: bool = False) -> sp.csr_matrix:
    s = space(mesh)
    return s.matrix(s.local_mass(), full)


def assemble_weighted_mass(mesh: Mesh, w, deriv, degree: int = NONLINEAR_DEGREE,
                           full: bool = False) -> sp.csr_matrix:
    """``W[i, j] = integral of deriv(w_h) phi_i phi_j``, ``deriv`` applied at quadrature points."""
    s = space(mesh)
    vals = np.broadcast_to(deriv(s.evaluate(w, degree)), (mesh.num_cells, s.rule(degree).num_points))
    return s.matrix(s.local_weighted_mass(vals, degree), full)


def assemble_function_load(mesh: Mesh, w, fnl, degree: int = NONLINEAR_DEGREE) -> np.ndarray:
    s = space(mesh)
    vals = np.broadcast_to(fnl(s.evaluate(w, degree)), (mesh.num_cells, s.rule(degree).num_points))
    return s.load(s.local_load(vals, degree))


def assemble_source_load(mesh: Mesh, g, t: float, degree: int = ACCURATE_DEGREE) -> np.ndarray:
    """``F[i] = integral of g(x, t) phi_i`` for a vectorised ``g(x, t)``."""
    s = space(mesh)
    x = s.physical_points(degree)
    vals = np.broadcast_to(g(x, t), x.shape[:2])
    return s.load(s.local_load(vals, degree))


def l2_error(mesh: Mesh, U, exact, t: float, degree: int = ACCURATE_DEGREE) -> float:
    """L2 norm of ``U_h - exact(., t)`` over the whole domain."""
    s = space(mesh)
    x = s.physical_points(degree)
    diff = s.evaluate(U, degree) - np.broadcast_to(exact(x, t), x.shape[:2])
    wq = s.volumes[:, None] * s.rule(degree).normalized_weights[None, :]
    return float(np.sqrt(np.sum(wq * diff * diff)))
