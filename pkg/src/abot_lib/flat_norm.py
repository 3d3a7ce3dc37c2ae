# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Flat distances between polyhedral currents, computed as linear programs.

Zero-currents are filled by segments between their atoms; one-currents are filled
by 2-chains of a planar triangulation that contains every edge of both currents,
which gives an upper bound on the flat norm of their difference.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.spatial import Delaunay

from src.constants import GEOM_TOL
from .anisotropy import cross2
from .currents import PolyhedralOneCurrent, ZeroCurrent, canonicalize
from .errors import DimensionMismatchError, DomainError, NonConformingMeshError, NumericalDegeneracyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Triangulation:
    """
    Planar simplicial complex. Triangles are stored counterclockwise; `edges` lists every
    undirected edge once as (i, j) with i < j, oriented i -> j.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        T = np.array(self.triangles, dtype=int).reshape(-1, 3)
        if V.ndim != 2 or V.shape[1] != 2:
            raise DimensionMismatchError(f"Triangulation vertices must be planar, got shape {V.shape}")
        if T.size and (T.min() < 0 or T.max() >= V.shape[0]):
            raise DomainError("Triangle indices out of range")
        signed = cross2(V[T[:, 1]] - V[T[:, 0]], V[T[:, 2]] - V[T[:, 0]])
        if np.any(signed == 0):
            raise DomainError(f"Triangle {int(np.argmax(signed == 0))} is degenerate")
        clockwise = signed < 0
        T[clockwise] = T[clockwise][:, [0, 2, 1]]
        V.setflags(write=False)
        T.setflags(write=False)
        object.__setattr__(self, 'vertices', V)
        object.__setattr__(self, 'triangles', T)

    @classmethod
    def grid(cls, nx: int, ny: int, bounds: Tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0),
             diagonal: str = 'up') -> 'Triangulation':
        """
        Structured mesh of nx x ny cells, each cut by its diagonal.

        Args:
            nx, ny: Cells per axis
            bounds: (xmin, ymin, xmax, ymax)
            diagonal: 'up' cuts cells from lower-left to upper-right, 'down' the other way
        """
        if nx < 1 or ny < 1:
            raise DomainError("Grid needs at least one cell per axis")
        xmin, ymin, xmax, ymax = bounds
        xs = np.linspace(xmin, xmax, nx + 1)
        ys = np.linspace(ymin, ymax, ny + 1)
        vertices = np.array([[x, y] for y in ys for x in xs])

        def vid(i: int, j: int) -> int:
            return j * (nx + 1) + i

        triangles = []
        for j in range(ny):
            for i in range(nx):
                a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
                if diagonal == 'up':
                    triangles += [(a, b, c), (a, c, d)]
                else:
                    triangles += [(a, b, d), (b, c, d)]
        return cls(vertices, np.array(triangles))

    @classmethod
    def from_delaunay(cls, points: Sequence[Sequence[float]]) -> 'Triangulation':
        P = np.asarray(points, dtype=float)
        return cls(P, Delaunay(P).simplices)

    @property
    def edges(self) -> np.ndarray:
        T = self.triangles
        pairs = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
        return np.unique(np.sort(pairs, axis=1), axis=0)

    def areas(self) -> np.ndarray:
        V, T = self.vertices, self.triangles
        return 0.5 * cross2(V[T[:, 1]] - V[T[:, 0]], V[T[:, 2]] - V[T[:, 0]])

    def boundary_matrix(self) -> Tuple[sparse.csr_matrix, Dict[Tuple[int, int], int]]:
        """Signed edge x triangle incidence of the boundary operator on 2-chains."""
        edges = self.edges
        index = {(int(i), int(j)): k for k, (i, j) in enumerate(edges)}
        rows, cols, vals = [], [], []
        for t, tri in enumerate(self.triangles):
            for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                u, v = int(u), int(v)
                rows.append(index[(min(u, v), max(u, v))])
                cols.append(t)
                vals.append(1.0 if u < v else -1.0)
        shape = (edges.shape[0], self.triangles.shape[0])
        return sparse.csr_matrix((vals, (rows, cols)), shape=shape), index


def flat_distance_zero(S: ZeroCurrent, T: ZeroCurrent) -> float:
    """
    Flat distance between two 0-currents.

    Solves min sum_ij f_ij |p_i - p_j| + sum_i (r+_i + r-_i) subject to
    w_i = r+_i - r-_i + sum_j (f_ji - f_ij) at every atom of S - T, with all variables
    non-negative: mass is either moved along a segment between atoms or paid directly.
    """
    D = S - T
    k = len(D)
    if k == 0:
        return 0.0
    if k == 1:
        return float(abs(D.weights[0]))

    P = D.points
    pairs = [(i, j) for i in range(k) for j in range(k) if i != j]
    n_flow = len(pairs)
    lengths = np.array([np.linalg.norm(P[i] - P[j]) for i, j in pairs])
    cost = np.concatenate([lengths, np.ones(2 * k)])

    rows, cols, vals = [], [], []
    for col, (i, j) in enumerate(pairs):
        rows += [i, j]
        cols += [col, col]
        vals += [-1.0, 1.0]
    for i in range(k):
        rows += [i, i]
        cols += [n_flow + i, n_flow + k + i]
        vals += [1.0, -1.0]
    A_eq = sparse.csr_matrix((vals, (rows, cols)), shape=(k, n_flow + 2 * k))

    result = linprog(cost, A_eq=A_eq, b_eq=D.weights, bounds=(0, None), method='highs')
    if result.status != 0:
        raise NumericalDegeneracyError(f"Flat distance LP failed: {result.message}")
    return float(result.fun)


def chain_coefficients(P: PolyhedralOneCurrent, mesh: Triangulation, tol: float = GEOM_TOL) -> np.ndarray:
    """
    Express a planar polyhedral current as a 1-chain of the mesh.

    Every canonical edge must run along mesh edges between mesh vertices.

    Raises:
        NonConformingMeshError: If some edge is not a union of mesh edges
    """
    C = canonicalize(P)
    edges = mesh.edges
    index = {(int(i), int(j)): k for k, (i, j) in enumerate(edges)}
    coeffs = np.zeros(edges.shape[0])
    if len(C) == 0:
        return coeffs
    if C.dim != 2:
        raise DimensionMismatchError("Mesh chains are planar")

    V = mesh.vertices
    for a, b, theta in zip(C.A, C.B, C.theta):
        direction = b - a
        length = float(np.linalg.norm(direction))
        unit = direction / length
        rel = V - a
        t = rel @ unit
        off = np.linalg.norm(rel - t[:, None] * unit[None, :], axis=1)
        on = np.nonzero((off <= tol) & (t >= -tol) & (t <= length + tol))[0]
        chain = on[np.argsort(t[on], kind='stable')]
        if (chain.size < 2 or np.linalg.norm(V[chain[0]] - a) > tol
                or np.linalg.norm(V[chain[-1]] - b) > tol):
            raise NonConformingMeshError(f"Edge {a.tolist()} -> {b.tolist()} does not start and end at mesh vertices")
        for u, v in zip(chain[:-1], chain[1:]):
            key = (int(min(u, v)), int(max(u, v)))
            if key not in index:
                raise NonConformingMeshError(
                    f"Edge {a.tolist()} -> {b.tolist()} crosses the mesh between vertices {V[u].tolist()} and {V[v].tolist()}")
            coeffs[index[key]] += theta if u < v else -theta
    return coeffs


def flat_distance_one_upper(P: PolyhedralOneCurrent, Q: PolyhedralOneCurrent, mesh: Triangulation) -> float:
    """
    Upper bound on the flat norm of P - Q over 1-chains R and 2-chains S of a mesh.

    Minimizes M(R) + M(S) with P - Q = R + boundary(S); both currents must run along mesh
    edges. Refining the mesh can only lower the bound.

    Raises:
        NonConformingMeshError: If an edge of P - Q is not a union of mesh edges
    """
    c = chain_coefficients(P - Q, mesh)
    if not np.any(c):
        return 0.0

    boundary_op, _ = mesh.boundary_matrix()
    n_edges, n_tri = boundary_op.shape
    edge_lengths = np.linalg.norm(mesh.vertices[mesh.edges[:, 1]] - mesh.vertices[mesh.edges[:, 0]], axis=1)
    cost = np.concatenate([edge_lengths, edge_lengths, mesh.areas(), mesh.areas()])
    identity = sparse.identity(n_edges, format='csr')
    A_eq = sparse.hstack([identity, -identity, boundary_op, -boundary_op], format='csr')

    result = linprog(cost, A_eq=A_eq, b_eq=c, bounds=(0, None), method='highs')
    if result.status != 0:
        raise NumericalDegeneracyError(f"Flat distance LP failed: {result.message}")
    logger.debug(f"Flat bound {result.fun:.6g} on a mesh with {n_edges} edges and {n_tri} triangles")
    return float(result.fun)
