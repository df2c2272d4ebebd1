"""Structured simplicial meshes of the unit square and unit cube."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Mesh",
    "unit_square_mesh",
    "unit_cube_mesh",
    "unit_mesh",
    "mesh_size",
    "signed_volumes",
    "write_mesh",
]


@dataclass(frozen=True, eq=False)
class Mesh:
    """Vertices, simplices and boundary classification.

    ``interior_index[v]`` is the dense unknown number of vertex ``v`` or -1
    for boundary vertices; ``interior_vertices`` is its inverse.
    """

    dim: int
    M: int
    vertices: np.ndarray
    cells: np.ndarray
    is_boundary: np.ndarray
    interior_index: np.ndarray
    interior_vertices: np.ndarray

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def num_interior(self) -> int:
        return self.interior_vertices.shape[0]


def _lattice(M: int, dim: int) -> np.ndarray:
    # x varies fastest: vertex (i, j, k) has index i + (M+1) j + (M+1)^2 k
    axes = np.meshgrid(*([np.arange(M + 1)] * dim), indexing="ij")
    idx = np.stack([a.ravel(order="F") for a in axes], axis=1)
    return idx


def _finish(dim: int, M: int, lattice: np.ndarray, cells: np.ndarray) -> Mesh:
    vertices = lattice / M
    is_boundary = np.any((lattice == 0) | (lattice == M), axis=1)
    interior_vertices = np.flatnonzero(~is_boundary)
    interior_index = np.full(len(vertices), -1, dtype=np.int64)
    interior_index[interior_vertices] = np.arange(len(interior_vertices))
    for a in (vertices, cells, is_boundary, interior_index, interior_vertices):
        a.setflags(write=False)
    return Mesh(dim, M, vertices, cells, is_boundary, interior_index, interior_vertices)


def _check_M(M) -> int:
    if not (isinstance(M, (int, np.integer)) and M >= 1):
        raise ValueError(f"M must be a positive integer, got {M!r}")
    return int(M)


def unit_square_mesh(M: int) -> Mesh:
    """M x M squares, each cut along its lower-left to upper-right diagonal."""
    M = _check_M(M)
    n = M + 1
    i, j = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    i, j = i.ravel(order="F"), j.ravel(order="F")
    v00 = i + n * j
    v10 = v00 + 1
    v01 = v00 + n
    v11 = v01 + 1
    lower = np.stack([v00, v10, v11], axis=1)
    upper = np.stack([v00, v11, v01], axis=1)
    cells = np.stack([lower, upper], axis=1).reshape(-1, 3)
    return _finish(2, M, _lattice(M, 2), cells.astype(np.int64))


def _kuhn_template() -> list[tuple[int, ...]]:
    """Six tetrahedra of the unit cube sharing the (0,0,0)-(1,1,1) diagonal.

    Each follows a monotone lattice path; odd permutations get their last
    two vertices swapped so every tet is positively oriented.
    """
    tets = []
    for perm in itertools.permutations(range(3)):
        corner = np.zeros(3, dtype=int)
        path = [0]
        for axis in perm:
            corner[axis] = 1
            path.append(int(corner[0] + 2 * corner[1] + 4 * corner[2]))
        inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        if inversions % 2:
            path[2], path[3] = path[3], path[2]
        tets.append(tuple(path))
    return tets


def unit_cube_mesh(M: int) -> Mesh:
    """M^3 cubes, each split into the six Kuhn tetrahedra."""
    M = _check_M(M)
    n = M + 1
    i, j, k = np.meshgrid(np.arange(M), np.arange(M), np.arange(M), indexing="ij")
    base = (i + n * j + n * n * k).ravel(order="F")
    # local corner c = bx + 2 by + 4 bz -> global offset
    offsets = np.array([bx + n * by + n * n * bz
                        for bz in (0, 1) for by in (0, 1) for bx in (0, 1)])
    template = np.array(_kuhn_template())
    cells = base[:, None, None] + offsets[template][None, :, :]
    return _finish(3, M, _lattice(M, 3), cells.reshape(-1, 4).astype(np.int64))


def unit_mesh(dim: int, M: int) -> Mesh:
    if dim == 2:
        return unit_square_mesh(M)
    if dim == 3:
        return unit_cube_mesh(M)
    raise ValueError(f"dim must be 2 or 3, got {dim!r}")


def signed_volumes(mesh: Mesh) -> np.ndarray:
    x = mesh.vertices[mesh.cells]
    edges = x[:, 1:, :] - x[:, :1, :]
    return np.linalg.det(edges) / math.factorial(mesh.dim)


def mesh_size(mesh: Mesh) -> float:
    """Largest cell diameter (longest edge, for simplices)."""
    x = mesh.vertices[mesh.cells]
    h = 0.0
    for a, b in itertools.combinations(range(mesh.dim + 1), 2):
        h = max(h, float(np.linalg.norm(x[:, a] - x[:, b], axis=1).max()))
    return h


def write_mesh(mesh: Mesh, path) -> Path:
    """Plain-text dump: a ``vertices`` block then a ``cells`` block."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"dim {mesh.dim}\n")
        fh.write(f"vertices {mesh.num_vertices}\n")
        for x, b in zip(mesh.vertices, mesh.is_boundary):
            fh.write(" ".join(f"{c:.17g}" for c in x) + f" {int(b)}\n")
        fh.write(f"cells {mesh.num_cells}\n")
        for c in mesh.cells:
            fh.write(" ".join(str(v) for v in c) + "\n")
    return path
