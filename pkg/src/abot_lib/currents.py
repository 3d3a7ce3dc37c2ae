# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Polyhedral 0- and 1-currents.

A ZeroCurrent is a finite signed sum of Dirac atoms; a PolyhedralOneCurrent is a finite
sum of oriented segments with real multiplicities. Collinear overlaps are merged before
any nonlinear cost is applied, so the anisotropic H-mass sees the multiplicity carried by
each piece of the underlying set.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from src.constants import GEOM_TOL, ZERO_WEIGHT_TOL
from .anisotropy import Anisotropy, BranchingFunction, anisotropic_norms, check_branching_axioms, min_direction_cost
from .errors import (
    DegenerateEdgeError,
    DegenerateSliceError,
    DimensionMismatchError,
    DomainError,
    UnsupportedDimensionError,
)
from .igrep import DirectionMeasure

logger = logging.getLogger(__name__)

# Simple-cycle enumeration stops after this many cycles
MAX_CYCLES_SCANNED = 10000


def _snap(points: np.ndarray, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cluster points closer than tol.

    Points are visited in lexicographic order and joined to the first earlier
    representative within tol. Returns (representatives sorted lexicographically,
    index of the representative of every input point).
    """
    if points.shape[0] == 0:
        return points.reshape(0, points.shape[1] if points.ndim == 2 else 0), np.zeros(0, dtype=int)
    order = np.lexsort(points.T[::-1])
    reps: List[np.ndarray] = []
    assign = np.empty(points.shape[0], dtype=int)
    for idx in order:
        p = points[idx]
        for r, rep in enumerate(reps):
            if np.linalg.norm(p - rep) <= tol:
                assign[idx] = r
                break
        else:
            assign[idx] = len(reps)
            reps.append(p)
    return np.array(reps), assign


# ----------------------------------------
# 0-currents
# ----------------------------------------

@dataclass(frozen=True, eq=False)
class ZeroCurrent:
    """
    Signed sum of Dirac atoms, always kept canonical: points closer than the geometric
    tolerance are merged, weights summed, near-zero results dropped, atoms sorted
    lexicographically by point.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if points.ndim != 2:
            points = points.reshape(weights.shape[0], -1)
        if points.shape[0] != weights.shape[0]:
            raise DimensionMismatchError("ZeroCurrent needs one weight per point")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(weights))):
            raise DomainError("ZeroCurrent points and weights must be finite")

        reps, assign = _snap(points, GEOM_TOL)
        summed = np.zeros(reps.shape[0])
        np.add.at(summed, assign, weights)
        keep = np.abs(summed) > ZERO_WEIGHT_TOL
        points, weights = reps[keep], summed[keep]
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def empty(cls, dim: int = 2) -> 'ZeroCurrent':
        return cls(np.zeros((0, dim)), np.zeros(0))

    @classmethod
    def from_atoms(cls, atoms: Sequence[Tuple[Sequence[float], float]], dim: int = 2) -> 'ZeroCurrent':
        if not atoms:
            return cls.empty(dim)
        return cls(np.array([p for p, _ in atoms], dtype=float), np.array([w for _, w in atoms], dtype=float))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.weights.shape[0]

    def atoms(self) -> Iterator[Tuple[Tuple[float, ...], float]]:
        for p, w in zip(self.points, self.weights):
            yield tuple(float(x) for x in p), float(w)

    @property
    def is_zero(self) -> bool:
        return len(self) == 0

    @property
    def mass(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def h_mass(self, H: BranchingFunction) -> float:
        """sum_i H(|w_i|)."""
        return float(np.sum(H.evaluate(self.weights)))

    def positive_part(self) -> 'ZeroCurrent':
        keep = self.weights > 0
        return ZeroCurrent(self.points[keep], self.weights[keep])

    def __add__(self, other: 'ZeroCurrent') -> 'ZeroCurrent':
        if len(self) and len(other) and self.dim != other.dim:
            raise DimensionMismatchError("Cannot add 0-currents of different dimensions")
        dim = self.dim if len(self) else other.dim
        return ZeroCurrent(np.concatenate([self.points.reshape(-1, dim), other.points.reshape(-1, dim)]),
                           np.concatenate([self.weights, other.weights]))

    def __neg__(self) -> 'ZeroCurrent':
        return ZeroCurrent(self.points, -self.weights)

    def __sub__(self, other: 'ZeroCurrent') -> 'ZeroCurrent':
        return self + (-other)

    def __mul__(self, scalar: float) -> 'ZeroCurrent':
        return ZeroCurrent(self.points, float(scalar) * self.weights)

    __rmul__ = __mul__

    def equals(self, other: 'ZeroCurrent', tol: float = 0.0) -> bool:
        """Atomwise comparison: same points (after snapping) and weights within tol."""
        if len(self) != len(other):
            return False
        if len(self) == 0:
            return True
        if self.points.shape != other.points.shape:
            return False
        return bool(np.all(np.linalg.norm(self.points - other.points, axis=1) <= GEOM_TOL)
                    and np.all(np.abs(self.weights - other.weights) <= tol))


# ----------------------------------------
# 1-currents
# ----------------------------------------

@dataclass(frozen=True, eq=False)
class PolyhedralOneCurrent:
    """
    Oriented segments a_e -> b_e with multiplicities theta_e.

    Construction only validates; `canonical()` returns the merged form. `is_canonical`
    is set on values produced by canonicalize.
    """

    A: np.ndarray
    B: np.ndarray
    theta: np.ndarray
    is_canonical: bool = False

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).reshape(-1)
        A = np.array(self.A, dtype=float).reshape(theta.shape[0], -1)
        B = np.array(self.B, dtype=float).reshape(theta.shape[0], -1)
        if A.shape != B.shape:
            raise DimensionMismatchError(f"Edge endpoint arrays differ in shape: {A.shape} vs {B.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise DomainError("Edge endpoints must be finite")
        if not np.all(np.isfinite(theta)):
            raise DomainError("Multiplicities must be finite")
        same = np.all(A == B, axis=1)
        if np.any(same):
            k = int(np.argmax(same))
            raise DegenerateEdgeError(f"Edge {k} has identical endpoints {A[k].tolist()}")
        for arr in (A, B, theta):
            arr.setflags(write=False)
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'B', B)
        object.__setattr__(self, 'theta', theta)

    @classmethod
    def empty(cls, dim: int = 2) -> 'PolyhedralOneCurrent':
        return cls(np.zeros((0, dim)), np.zeros((0, dim)), np.zeros(0), is_canonical=True)

    @classmethod
    def from_edges(cls, edges: Sequence[Tuple[Sequence[float], Sequence[float], float]],
                   dim: int = 2) -> 'PolyhedralOneCurrent':
        if not edges:
            return cls.empty(dim)
        return cls(np.array([e[0] for e in edges], dtype=float),
                   np.array([e[1] for e in edges], dtype=float),
                   np.array([e[2] for e in edges], dtype=float))

    @classmethod
    def polyline(cls, points: Sequence[Sequence[float]], theta: float = 1.0) -> 'PolyhedralOneCurrent':
        P = np.asarray(points, dtype=float)
        return cls(P[:-1], P[1:], np.full(P.shape[0] - 1, float(theta)))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def __len__(self) -> int:
        return self.theta.shape[0]

    def edges(self) -> Iterator[Tuple[Tuple[float, ...], Tuple[float, ...], float]]:
        for a, b, t in zip(self.A, self.B, self.theta):
            yield tuple(float(x) for x in a), tuple(float(x) for x in b), float(t)

    def canonical(self, tol: float = GEOM_TOL) -> 'PolyhedralOneCurrent':
        return self if self.is_canonical else canonicalize(self, tol)

    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.B - self.A, axis=1)

    def __add__(self, other: 'PolyhedralOneCurrent') -> 'PolyhedralOneCurrent':
        if len(self) == 0:
            return PolyhedralOneCurrent(other.A, other.B, other.theta)
        if len(other) == 0:
            return PolyhedralOneCurrent(self.A, self.B, self.theta)
        if self.dim != other.dim:
            raise DimensionMismatchError("Cannot add currents of different dimensions")
        return PolyhedralOneCurrent(np.concatenate([self.A, other.A]), np.concatenate([self.B, other.B]),
                                    np.concatenate([self.theta, other.theta]))

    def __neg__(self) -> 'PolyhedralOneCurrent':
        return PolyhedralOneCurrent(self.A, self.B, -self.theta, is_canonical=self.is_canonical)

    def __sub__(self, other: 'PolyhedralOneCurrent') -> 'PolyhedralOneCurrent':
        return self + (-other)

    def __mul__(self, scalar: float) -> 'PolyhedralOneCurrent':
        return PolyhedralOneCurrent(self.A, self.B, float(scalar) * self.theta)

    __rmul__ = __mul__


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _distance_to_line(points: np.ndarray, origin: np.ndarray, direction: np.ndarray) -> np.ndarray:
    rel = points - origin
    along = rel @ direction
    return np.linalg.norm(rel - along[:, None] * direction[None, :], axis=1)


def canonicalize(P: PolyhedralOneCurrent, tol: float = GEOM_TOL) -> PolyhedralOneCurrent:
    """
    Canonical form of a polyhedral 1-current.

    Endpoints closer than tol are snapped together. Edges whose endpoints all lie within
    tol of each other's supporting lines are grouped; inside a group every edge is cut at
    each snapped vertex lying on the group line, the signed multiplicities of the pieces
    are summed per elementary interval, zero intervals are dropped and each piece is
    oriented from its lexicographically smaller endpoint. Output edges are sorted
    lexicographically. Mass and boundary are preserved; the operation is idempotent.

    Raises:
        DegenerateEdgeError: If snapping collapses an edge to a point
    """
    if P.is_canonical:
        return P
    m, dim = len(P), P.dim
    if m == 0:
        return PolyhedralOneCurrent.empty(dim)

    vertices, assign = _snap(np.concatenate([P.A, P.B]), tol)
    ia, ib = assign[:m], assign[m:]
    collapsed = np.nonzero(ia == ib)[0]
    if collapsed.size:
        raise DegenerateEdgeError(f"Edge {int(collapsed[0])} is shorter than the geometric tolerance {tol:g}")

    A, B = vertices[ia], vertices[ib]
    directions = (B - A) / np.linalg.norm(B - A, axis=1, keepdims=True)

    groups = _UnionFind(m)
    for i in range(m):
        for j in range(i + 1, m):
            if groups.find(i) == groups.find(j):
                continue
            ends_j = np.stack([A[j], B[j]])
            ends_i = np.stack([A[i], B[i]])
            if (np.all(_distance_to_line(ends_j, A[i], directions[i]) <= tol)
                    and np.all(_distance_to_line(ends_i, A[j], directions[j]) <= tol)):
                groups.union(i, j)

    members: Dict[int, List[int]] = {}
    for i in range(m):
        members.setdefault(groups.find(i), []).append(i)

    out_a: List[int] = []
    out_b: List[int] = []
    out_theta: List[float] = []
    for edge_ids in members.values():
        first = edge_ids[0]
        origin = A[first]
        direction = directions[first]
        t_vertices = (vertices - origin) @ direction
        on_line = _distance_to_line(vertices, origin, direction) <= tol
        ends = np.concatenate([ia[edge_ids], ib[edge_ids]])
        lo, hi = t_vertices[ends].min(), t_vertices[ends].max()
        candidates = np.nonzero(on_line & (t_vertices >= lo - tol) & (t_vertices <= hi + tol))[0]
        candidates = np.union1d(candidates, ends)
        breakpoints = candidates[np.argsort(t_vertices[candidates], kind='stable')]
        position = {int(v): k for k, v in enumerate(breakpoints)}

        signed = np.zeros(len(breakpoints) - 1)
        for e in edge_ids:
            pa, pb = position[int(ia[e])], position[int(ib[e])]
            if pa < pb:
                signed[pa:pb] += P.theta[e]
            else:
                signed[pb:pa] -= P.theta[e]

        for k, value in enumerate(signed):
            if abs(value) <= ZERO_WEIGHT_TOL:
                continue
            u, w = int(breakpoints[k]), int(breakpoints[k + 1])
            # vertices are sorted lexicographically, so the smaller index is the smaller point
            if u < w:
                out_a.append(u), out_b.append(w), out_theta.append(float(value))
            else:
                out_a.append(w), out_b.append(u), out_theta.append(-float(value))

    if not out_theta:
        return PolyhedralOneCurrent.empty(dim)
    order = np.lexsort((np.array(out_b), np.array(out_a)))
    ea = np.array(out_a)[order]
    eb = np.array(out_b)[order]
    return PolyhedralOneCurrent(vertices[ea], vertices[eb], np.array(out_theta)[order], is_canonical=True)


def boundary(P: PolyhedralOneCurrent) -> ZeroCurrent:
    """sum_e theta_e (delta_{b_e} - delta_{a_e}), canonicalized."""
    if len(P) == 0:
        return ZeroCurrent.empty(P.dim)
    return ZeroCurrent(np.concatenate([P.B, P.A]), np.concatenate([P.theta, -P.theta]))


def mass(P: PolyhedralOneCurrent) -> float:
    C = canonicalize(P)
    return float(np.sum(np.abs(C.theta) * C.lengths()))


def h_mass(P: PolyhedralOneCurrent, H: BranchingFunction, sigma: Anisotropy) -> float:
    """
    Anisotropic H-mass sum_e H(|theta_e|) G_sigma(b_e - a_e) over canonical edges.

    Overlaps are merged before H is applied. Non-convex anisotropies are accepted.
    """
    C = canonicalize(P)
    if len(C) == 0:
        return 0.0
    if C.dim != sigma.dim:
        raise DimensionMismatchError(f"Current dimension {C.dim} does not match anisotropy dimension {sigma.dim}")
    return float(np.sum(H.evaluate(C.theta) * anisotropic_norms(sigma, C.B - C.A)))


# ----------------------------------------
# Slicing
# ----------------------------------------

@dataclass(frozen=True)
class SliceSpec:
    """Fiber {x : <x, direction> = offset} of the projection onto the line spanned by direction."""

    direction: Tuple[float, ...]
    offset: float

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        length = float(np.linalg.norm(d))
        if length == 0 or not np.isfinite(length):
            raise DomainError("Slice direction must be a finite nonzero vector")
        if not np.isfinite(self.offset):
            raise DomainError("Slice offset must be finite")
        object.__setattr__(self, 'direction', tuple(float(x) for x in d / length))


def slice_current(P: PolyhedralOneCurrent, spec: SliceSpec, tol: float = GEOM_TOL) -> ZeroCurrent:
    """
    Slice <P, p_L, y> of a current by the fiber of spec.

    An edge with projections t_a, t_b contributes an atom at its crossing point when
    min(t_a, t_b) <= y < max(t_a, t_b), weighted theta * sign(t_b - t_a). The half-open
    rule counts a path through a vertex on the fiber exactly once.

    Raises:
        DegenerateSliceError: If a canonical edge lies inside the fiber
        DimensionMismatchError: If the direction dimension differs from the current's
    """
    C = canonicalize(P)
    d = np.asarray(spec.direction)
    if len(C) == 0:
        return ZeroCurrent.empty(d.shape[0])
    if d.shape[0] != C.dim:
        raise DimensionMismatchError(f"Slice direction has dimension {d.shape[0]}, current has {C.dim}")

    y = spec.offset
    ta, tb = C.A @ d, C.B @ d
    inside = (np.abs(ta - y) <= tol) & (np.abs(tb - y) <= tol)
    if np.any(inside):
        k = int(np.argmax(inside))
        raise DegenerateSliceError(f"Edge {C.A[k].tolist()} -> {C.B[k].tolist()} lies in the fiber at offset {y}")

    crossing = (np.minimum(ta, tb) <= y) & (y < np.maximum(ta, tb))
    if not np.any(crossing):
        return ZeroCurrent.empty(C.dim)
    s = (y - ta[crossing]) / (tb[crossing] - ta[crossing])
    points = C.A[crossing] + s[:, None] * (C.B[crossing] - C.A[crossing])
    weights = C.theta[crossing] * np.sign(tb[crossing] - ta[crossing])
    return ZeroCurrent(points, weights)


def h_mass_via_slicing(P: PolyhedralOneCurrent, H: BranchingFunction, mu: DirectionMeasure) -> float:
    """
    Integral over directions (against mu) and offsets of M_H of the slices, in closed form.

    For an atom (omega, m) the offsets integral of an edge equals H(|theta_e|) times the
    length of its projection on omega, so the total is
    sum_j m_j sum_e H(|theta_e|) |<b_e - a_e, omega_j>|.

    Raises:
        UnsupportedDimensionError: If P is not planar
    """
    C = canonicalize(P)
    if len(C) and C.dim != 2:
        raise UnsupportedDimensionError(f"Slicing identity is evaluated for planar currents, got dimension {C.dim}")
    if len(mu) == 0:
        logger.warning("Empty direction measure: sliced H-mass is 0")
        return 0.0
    if len(C) == 0:
        return 0.0
    projections = np.abs((C.B - C.A) @ mu.omegas.T)
    return float(H.evaluate(C.theta) @ projections @ mu.masses)


def h_mass_by_fiber_integration(P: PolyhedralOneCurrent,
                                H: BranchingFunction,
                                mu: DirectionMeasure,
                                tol: float = GEOM_TOL) -> float:
    """
    The slicing formula evaluated by actually slicing.

    For each atom the slice mass is piecewise constant between consecutive projected
    vertices, so slicing at interval midpoints and weighting by interval length is exact.
    """
    C = canonicalize(P)
    if len(C) and C.dim != 2:
        raise UnsupportedDimensionError(f"Slicing identity is evaluated for planar currents, got dimension {C.dim}")
    if len(mu) == 0:
        logger.warning("Empty direction measure: sliced H-mass is 0")
        return 0.0
    if len(C) == 0:
        return 0.0

    total = 0.0
    points = np.concatenate([C.A, C.B])
    for omega, weight in zip(mu.omegas, mu.masses):
        ts = np.unique(points @ omega)
        inner = 0.0
        for lo, hi in zip(ts[:-1], ts[1:]):
            if hi - lo <= 2 * tol:
                continue
            fiber = slice_current(C, SliceSpec(tuple(omega), 0.5 * (lo + hi)), tol=tol)
            inner += fiber.h_mass(H) * (hi - lo)
        total += weight * inner
    return float(total)


# ----------------------------------------
# Cycles
# ----------------------------------------

def _support_digraph(C: PolyhedralOneCurrent) -> Tuple[nx.DiGraph, np.ndarray]:
    vertices, assign = _snap(np.concatenate([C.A, C.B]), GEOM_TOL)
    m = len(C)
    graph = nx.DiGraph()
    graph.add_nodes_from(range(vertices.shape[0]))
    for e in range(m):
        u, v = int(assign[e]), int(assign[m + e])
        if C.theta[e] < 0:
            u, v = v, u
        graph.add_edge(u, v, edge=e)
    return graph, vertices


def find_cycle(P: PolyhedralOneCurrent) -> Optional[PolyhedralOneCurrent]:
    """
    A nontrivial cyclic subcurrent of P, or None when P is acyclic.

    The support digraph orients every canonical edge by the sign of its multiplicity.
    Among its simple cycles the one with the lexicographically smallest sorted vertex
    list is chosen (vertices numbered in lexicographic order of their coordinates). The
    returned cycle carries the constant magnitude c = min |theta_e| along it, with the
    sign of each edge of P, so its boundary vanishes and it is dominated by P edgewise.
    """
    C = canonicalize(P)
    if len(C) == 0:
        return None
    graph, _ = _support_digraph(C)
    if nx.is_directed_acyclic_graph(graph):
        return None

    best: Optional[List[int]] = None
    best_key: Optional[Tuple[int, ...]] = None
    for scanned, cycle in enumerate(nx.simple_cycles(graph)):
        key = tuple(sorted(cycle))
        if best_key is None or key < best_key:
            best, best_key = cycle, key
        if scanned + 1 >= MAX_CYCLES_SCANNED:
            logger.warning(f"Stopped cycle enumeration after {MAX_CYCLES_SCANNED} cycles")
            break

    edge_ids = [graph.edges[best[i], best[(i + 1) % len(best)]]['edge'] for i in range(len(best))]
    magnitude = float(np.min(np.abs(C.theta[edge_ids])))
    theta = magnitude * np.sign(C.theta[edge_ids])
    order = np.argsort(edge_ids)
    ids = np.array(edge_ids)[order]
    return PolyhedralOneCurrent(C.A[ids], C.B[ids], theta[order], is_canonical=True)


def is_acyclic(P: PolyhedralOneCurrent) -> bool:
    C = canonicalize(P)
    if len(C) == 0:
        return True
    graph, _ = _support_digraph(C)
    return nx.is_directed_acyclic_graph(graph)


def remove_cycles(P: PolyhedralOneCurrent, H: BranchingFunction, sigma: Anisotropy) -> PolyhedralOneCurrent:
    """
    Subtract cycles until the current is acyclic.

    Every subtraction zeroes at least one canonical edge, so the loop terminates; the
    boundary is unchanged and the H-mass does not increase when H is non-decreasing.
    """
    if not check_branching_axioms(H).monotone_ok:
        logger.warning("Branching function is not monotone: cycle removal may increase the H-mass")

    R = canonicalize(P)
    removed = 0
    while True:
        cycle = find_cycle(R)
        if cycle is None:
            break
        R = canonicalize(R - cycle)
        removed += 1
    if removed:
        logger.debug(f"Removed {removed} cycles; H-mass {h_mass(P, H, sigma):.6g} -> {h_mass(R, H, sigma):.6g}")
    return R


def is_subcurrent(S: PolyhedralOneCurrent, T: PolyhedralOneCurrent, tol: float = 1e-9) -> bool:
    """S <= T in the sense M(T) = M(S) + M(T - S)."""
    return abs(mass(T) - mass(S) - mass(T - S)) <= tol * max(1.0, mass(T))


def max_multiplicity(P: PolyhedralOneCurrent) -> float:
    C = canonicalize(P)
    return float(np.max(np.abs(C.theta))) if len(C) else 0.0


def mass_bound_constant(H: BranchingFunction, sigma: Anisotropy, total_mass: float, grid_points: int = 1000) -> float:
    """
    C = (min_u sigma(u))^-1 * max_{0 < y <= M} y / H(y), maximized on a uniform grid,
    so that M(R) <= C * M_{H,sigma}(R) for acyclic R with multiplicities at most M.
    """
    if total_mass <= 0:
        raise DomainError(f"Total mass must be positive, got {total_mass}")
    ys = total_mass * np.arange(1, grid_points + 1) / grid_points
    costs = H.evaluate(ys)
    if np.any(costs <= 0):
        raise DomainError("Branching function must be positive on (0, M] for the mass bound")
    return float(np.max(ys / costs) / min_direction_cost(sigma))
