# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Integral-geometric representations of planar anisotropic norms.

A symmetric polygon norm is decomposed as ||u||_P = sum_i lambda_i |<u, w_i>| with
w_i the vertices rotated by 90 degrees. A general planar convex gauge is approximated
from outside by nested polygons built from supporting lines at dyadic boundary points,
and the decomposition of each polygon yields a discrete measure on directions. In
dimension >= 3 the module searches for violations of the hypermetric inequalities.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.constants import (
    DEFAULT_APPROX_DEPTH,
    DIRECTION_GRID_SIZE,
    HYPERMETRIC_TOL,
    MAX_APPROX_DEPTH,
    MAX_HYPERMETRIC_POINTS,
    MIN_APPROX_DEPTH,
    PARALLEL_TOL,
    RECON_TOL,
)
from src.parallel_executor import ParallelExecutor
from .anisotropy import (
    Anisotropy,
    SymmetricPolygon,
    anisotropic_norms,
    check_convexity,
    cross2,
    rot90,
    rotation_matrix,
    unit_sphere_points,
)
from .errors import (
    DegenerateEdgeError,
    DepthOverflowError,
    DomainError,
    NonConvexAnisotropyError,
    NumericalDegeneracyError,
    UnsupportedDimensionError,
)

logger = logging.getLogger(__name__)

# Minimum |coordinate| / |vector| for vertices and edges of a generic polygon
GENERIC_RATIO = 1e-3

# Relative step for numerical gradients of functional gauges
GRADIENT_STEP = 1e-6

HYPERMETRIC_CHUNK = 2048


# ----------------------------------------
# Direction measures
# ----------------------------------------

@dataclass(frozen=True, eq=False)
class DirectionMeasure:
    """
    Finite positive measure on unoriented planar directions.

    Atoms are folded to the upper half circle (angle in [0, pi)), merged and sorted by
    angle. `error` is the uniform relative reconstruction error when the measure was
    built to represent a gauge, `mass_bound` the 8/r certificate of its polygon.
    """

    omegas: np.ndarray
    masses: np.ndarray
    error: float = 0.0
    mass_bound: Optional[float] = None
    depth: Optional[int] = None

    def __post_init__(self):
        omegas = np.array(self.omegas, dtype=float).reshape(-1, 2)
        masses = np.array(self.masses, dtype=float).reshape(-1)
        if omegas.shape[0] != masses.shape[0]:
            raise DomainError("Direction measure needs one mass per direction")
        if np.any(~np.isfinite(masses)) or np.any(masses <= 0):
            raise DomainError("Direction measure masses must be finite and positive")
        norms = np.linalg.norm(omegas, axis=1)
        if np.any(norms == 0):
            raise DomainError("Direction measure atoms need nonzero directions")
        omegas = omegas / norms[:, None]

        angles = np.mod(np.arctan2(omegas[:, 1], omegas[:, 0]), np.pi)
        angles[np.isclose(angles, np.pi, rtol=0, atol=1e-15)] = 0.0
        order = np.argsort(angles, kind='stable')
        merged_angles: List[float] = []
        merged_masses: List[float] = []
        for idx in order:
            if merged_angles and abs(angles[idx] - merged_angles[-1]) <= 1e-12:
                merged_masses[-1] += masses[idx]
            else:
                merged_angles.append(float(angles[idx]))
                merged_masses.append(float(masses[idx]))

        phi = np.array(merged_angles)
        folded = np.stack([np.cos(phi), np.sin(phi)], axis=1).reshape(-1, 2)
        folded.setflags(write=False)
        merged = np.array(merged_masses)
        merged.setflags(write=False)
        object.__setattr__(self, 'omegas', folded)
        object.__setattr__(self, 'masses', merged)

    @classmethod
    def empty(cls) -> 'DirectionMeasure':
        return cls(np.zeros((0, 2)), np.zeros(0))

    def __len__(self) -> int:
        return self.masses.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def reconstruct(self, U) -> np.ndarray:
        """sum_j m_j |<u, omega_j>| for every row u of U."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if len(self) == 0:
            return np.zeros(U.shape[0])
        return np.abs(U @ self.omegas.T) @ self.masses

    def as_anisotropy(self) -> Anisotropy:
        """The planar anisotropy represented by this measure."""
        return Anisotropy(dim=2, kind='functional', func=self.reconstruct, label=f"measure({len(self)})")

    def to_json(self) -> List[Dict]:
        return [{'omega': [float(w[0]), float(w[1])], 'mass': float(m)} for w, m in zip(self.omegas, self.masses)]

    @classmethod
    def from_json(cls, atoms: Sequence[Dict]) -> 'DirectionMeasure':
        if not atoms:
            return cls.empty()
        return cls([a['omega'] for a in atoms], [a['mass'] for a in atoms])


# ----------------------------------------
# Polygon decomposition
# ----------------------------------------

@dataclass(frozen=True, eq=False)
class PolygonDecomposition:
    """||u||_P = sum_i weights[i] |<u, directions[i]>| for the polygon P it was built from."""

    weights: np.ndarray
    directions: np.ndarray
    inradius_bound: float
    normals: np.ndarray
    vertices: np.ndarray
    rotation_angle: float = 0.0

    def norm(self, u) -> np.ndarray:
        U = np.atleast_2d(np.asarray(u, dtype=float))
        values = np.abs(U @ self.directions.T) @ self.weights
        return values if np.ndim(u) > 1 else values[0]

    @property
    def weight_sum(self) -> float:
        """sum_i lambda_i ||v_i||, the total mass of the induced measure."""
        return float(np.sum(self.weights * np.linalg.norm(self.directions, axis=1)))

    @property
    def weight_bound(self) -> float:
        return 8.0 / self.inradius_bound

    def to_measure(self) -> DirectionMeasure:
        lengths = np.linalg.norm(self.directions, axis=1)
        return DirectionMeasure(self.directions / lengths[:, None], self.weights * lengths)


def edge_normals(P: SymmetricPolygon) -> np.ndarray:
    """
    Normals n_i = (a_i, b_i) with <n_i, x> = 1 on the edge v_i -> v_{i+1}.

    Each normal solves the 2x2 system <n_i, v_i> = <n_i, v_{i+1}> = 1; for an edge line
    y = m x + q this is a_i = -m/q, b_i = 1/q. The antipodal half is exact negation.

    Raises:
        DegenerateEdgeError: If an edge has zero length
    """
    v = P.vertices
    N = P.n_pairs
    start = v[:N]
    end = v[1:N + 1]
    degenerate = np.all(end == start, axis=1)
    if np.any(degenerate):
        raise DegenerateEdgeError(f"Edge {int(np.argmax(degenerate))} of the polygon has zero length")

    systems = np.stack([start, end], axis=1)
    half = np.linalg.solve(systems, np.ones((N, 2, 1)))[:, :, 0]
    return np.concatenate([half, -half], axis=0)


def _axis_clearance(P: SymmetricPolygon) -> Tuple[float, np.ndarray]:
    v = P.vertices
    vectors = np.concatenate([v, np.roll(v, -1, axis=0) - v], axis=0)
    ratios = np.min(np.abs(vectors), axis=1) / np.linalg.norm(vectors, axis=1)
    return float(ratios.min()), np.mod(np.arctan2(vectors[:, 1], vectors[:, 0]), np.pi / 2)


def rotate_generic(P: SymmetricPolygon) -> Tuple[SymmetricPolygon, float]:
    """
    Rotate P so that no vertex lies on a coordinate axis and no edge is axis-parallel.

    The angle is 0 when P is already generic (clearance at least min(1e-3, a quarter of
    the widest angular gap)); otherwise the coordinate axes are moved to the middle of the
    widest gap between vertex and edge directions taken modulo pi/2.

    Returns:
        (rotated polygon, rotation angle)
    """
    clearance, angles = _axis_clearance(P)
    angles = np.sort(angles)
    gaps = np.diff(np.concatenate([angles, [angles[0] + np.pi / 2]]))
    widest = int(np.argmax(gaps))
    if clearance >= min(GENERIC_RATIO, gaps[widest] / 4):
        return P, 0.0

    middle = angles[widest] + gaps[widest] / 2
    angle = float(np.pi / 2 - middle)
    rotated = P.rotated(angle)
    logger.debug(f"Rotated polygon by {angle:.6f} rad (clearance {clearance:.3e} -> {_axis_clearance(rotated)[0]:.3e})")
    return rotated, angle


def polygon_decompose(P: SymmetricPolygon,
                      parallel_tol: float = PARALLEL_TOL,
                      recon_tol: float = RECON_TOL) -> PolygonDecomposition:
    """
    Decompose a symmetric polygon norm into weighted line Jacobians.

    With n_k the edge normals and w_k = rot90(v_k), 2 lambda_k w_k = n_k - n_{k-1}
    (n_0 = -n_N). The construction runs on a generic rotation of P; weights are rotation
    invariant, so the directions are taken from the original vertices and the normals
    are mapped back to the original frame.

    Args:
        P: Symmetric polygon
        parallel_tol: Angular tolerance for n_k - n_{k-1} being parallel to w_k
        recon_tol: Tolerance of the reconstruction check on the vertices

    Returns:
        PolygonDecomposition of P

    Raises:
        NumericalDegeneracyError: If a normal difference is not parallel to its vertex
            direction, or the reconstruction check fails
    """
    generic, angle = rotate_generic(P)
    normals = edge_normals(generic)
    N = P.n_pairs

    diffs = normals[:N] - np.roll(normals, 1, axis=0)[:N]
    rotated_dirs = rot90(generic.half)
    d_len = np.linalg.norm(diffs, axis=1)
    w_len = np.linalg.norm(rotated_dirs, axis=1)
    sines = np.abs(cross2(diffs, rotated_dirs)) / (d_len * w_len)
    dots = np.einsum('ij,ij->i', diffs, rotated_dirs)
    bad = np.nonzero((sines >= parallel_tol) | (dots <= 0) | (d_len == 0))[0]
    if bad.size:
        k = int(bad[0])
        raise NumericalDegeneracyError(
            f"Normal difference n[{k}] - n[{(k - 1) % (2 * N)}] is not parallel to vertex direction w[{k}] "
            f"(sin={sines[k]:.3e}, dot={dots[k]:.3e})")

    weights = d_len / (2.0 * w_len)
    directions = rot90(P.half)
    original_normals = normals @ rotation_matrix(angle)

    decomposition = PolygonDecomposition(
        weights=weights,
        directions=directions,
        inradius_bound=P.inradius(),
        normals=original_normals,
        vertices=P.vertices,
        rotation_angle=angle,
    )

    residual = np.max(np.abs(decomposition.norm(P.vertices) - 1.0))
    if residual > recon_tol:
        raise NumericalDegeneracyError(f"Polygon reconstruction error {residual:.3e} exceeds {recon_tol:.1e}")
    return decomposition


# ----------------------------------------
# Outer polygonal approximation
# ----------------------------------------

class HalfSpaceCache:
    """
    Supporting half-spaces {<g, x> <= 1} of one gauge, keyed by the dyadic fraction of a
    full turn at which they were chosen. A point shared by two depths maps to the same key.
    """

    def __init__(self, gauge: Anisotropy):
        self.gauge = gauge
        self._normals: Dict[Fraction, np.ndarray] = {}
        self.hits = 0

    def normal(self, turn: Fraction) -> np.ndarray:
        if turn in self._normals:
            self.hits += 1
            return self._normals[turn]
        g = self._support_normal(2 * math.pi * float(turn))
        self._normals[turn] = g
        return g

    def __len__(self) -> int:
        return len(self._normals)

    def _support_normal(self, angle: float) -> np.ndarray:
        d = np.array([math.cos(angle), math.sin(angle)])
        gauge = self.gauge
        q = d / anisotropic_norms(gauge, d[None, :])[0]

        if gauge.kind == 'constant':
            return gauge.c * d

        if gauge.kind == 'polygonal':
            normals = gauge.polygon.support_normals()
            values = normals @ q
            active = normals[values >= values.max() - 1e-12 * abs(values.max())]
            if active.shape[0] == 1:
                g = active[0]
            else:
                # vertex of the ball: bisect the adjacent edge normals
                g = np.sum(active / np.linalg.norm(active, axis=1, keepdims=True), axis=0)
            return g / float(g @ q)

        h = GRADIENT_STEP * max(1.0, float(np.linalg.norm(q)))
        steps = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
        values = anisotropic_norms(gauge, q[None, :] + steps)
        g = np.array([values[0] - values[1], values[2] - values[3]]) / (2 * h)
        scale = float(g @ q)
        if scale <= 0:
            raise NumericalDegeneracyError(f"Gauge gradient at angle {angle:.6f} is not a supporting normal")
        return g / scale


def _check_planar_convex(gauge: Anisotropy) -> None:
    if gauge.dim != 2:
        raise UnsupportedDimensionError(f"Constructive representations are planar; got dimension {gauge.dim}")
    report = check_convexity(gauge)
    if not report.convex:
        raise NonConvexAnisotropyError(
            f"Anisotropy '{gauge.label}' is not convex (triangle defect {report.worst_defect:.3e})")


def approximate_body(gauge: Anisotropy,
                     depth: int,
                     cache: Optional[HalfSpaceCache] = None) -> SymmetricPolygon:
    """
    Outer polygonal approximation P_k of the unit ball C of a planar convex gauge.

    Boundary points are taken on the rays at angles 2 pi j / 2^k; at each one a
    supporting line is chosen (bisecting normal at corners of C) and P_k is the
    intersection of the 2^k half-spaces. Lines are keyed by the reduced fraction j / 2^k,
    so a point reused from a coarser depth reuses its half-space and P_k lies inside
    P_{k-1}.

    Args:
        gauge: Convex planar anisotropy
        depth: k in [2, 16]
        cache: Shared half-space cache (created when omitted)

    Returns:
        SymmetricPolygon P_k containing C

    Raises:
        DepthOverflowError: If depth is outside [2, 16]
        NonConvexAnisotropyError: If the gauge fails the convexity check
        UnsupportedDimensionError: If the gauge is not planar
    """
    if not (MIN_APPROX_DEPTH <= depth <= MAX_APPROX_DEPTH):
        raise DepthOverflowError(f"Approximation depth must lie in [{MIN_APPROX_DEPTH}, {MAX_APPROX_DEPTH}], got {depth}")
    if cache is None:
        _check_planar_convex(gauge)
        cache = HalfSpaceCache(gauge)
    elif cache.gauge is not gauge:
        raise DomainError("Half-space cache belongs to a different gauge")

    count = 2 ** depth
    half = count // 2
    normals = np.array([cache.normal(Fraction(j, count)) for j in range(half)])
    full = np.concatenate([normals, -normals], axis=0)

    # consecutive identical lines (several dyadic points on one flat piece) collapse to one
    keep = np.ones(half, dtype=bool)
    for j in range(half):
        prev = full[j - 1]
        if np.linalg.norm(full[j] - prev) <= 1e-12 * np.linalg.norm(full[j]):
            keep[j] = False
    if not keep.any():
        keep[0] = True
    lines = normals[keep]
    lines_full = np.concatenate([lines, -lines], axis=0)

    m = lines.shape[0]
    systems = np.stack([lines_full[:m], lines_full[1:m + 1]], axis=1)
    vertices = np.linalg.solve(systems, np.ones((m, 2, 1)))[:, :, 0]
    return SymmetricPolygon.from_half(_clean_half_cycle(vertices))


def _clean_half_cycle(half: np.ndarray) -> np.ndarray:
    """Drop repeated and collinear vertices of a symmetric cycle given by its first half."""
    while True:
        full = np.concatenate([half, -half], axis=0)
        n = full.shape[0]
        m = half.shape[0]
        drop = np.zeros(m, dtype=bool)
        for j in range(m):
            prev, cur, nxt = full[(j - 1) % n], full[j], full[(j + 1) % n]
            scale = max(1.0, float(np.linalg.norm(cur)))
            if np.linalg.norm(cur - prev) <= 1e-12 * scale:
                drop[j] = True
                continue
            e1, e2 = cur - prev, nxt - cur
            if cross2(e1, e2) <= 1e-12 * np.linalg.norm(e1) * np.linalg.norm(e2):
                drop[j] = True
        if not drop.any():
            return half
        # one vertex per pass keeps the neighbors of a dropped vertex valid
        half = np.delete(half, int(np.argmax(drop)), axis=0)


def approximation_sequence(gauge: Anisotropy, depths: Iterable[int]) -> List[SymmetricPolygon]:
    """Nested approximations sharing one half-space cache."""
    _check_planar_convex(gauge)
    cache = HalfSpaceCache(gauge)
    polygons = [approximate_body(gauge, k, cache=cache) for k in depths]
    logger.debug(f"Built {len(polygons)} approximations from {len(cache)} half-spaces ({cache.hits} reused)")
    return polygons


def hausdorff_to_body(P: SymmetricPolygon, gauge: Anisotropy, samples: int = 4096) -> float:
    """
    Hausdorff distance between P and the unit ball C of `gauge`, for P containing C.

    The farthest point of P from C is a vertex; its distance to C is exact for constant
    gauges and measured against `samples` boundary points of C otherwise.
    """
    if gauge.kind == 'constant':
        return float(max(0.0, np.max(np.linalg.norm(P.vertices, axis=1)) - 1.0 / gauge.c))
    boundary = unit_sphere_points(gauge, samples)
    inside = anisotropic_norms(gauge, P.vertices) <= 1.0
    dist = np.min(np.linalg.norm(P.vertices[:, None, :] - boundary[None, :, :], axis=2), axis=1)
    return float(np.max(np.where(inside, 0.0, dist)))


def reconstruction_error(measure: DirectionMeasure, gauge: Anisotropy, size: int = DIRECTION_GRID_SIZE) -> float:
    """max over the size-point direction grid of |reconstruct(u) / G(u) - 1|."""
    phi = 2 * np.pi * np.arange(size) / size
    U = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    return float(np.max(np.abs(measure.reconstruct(U) / anisotropic_norms(gauge, U) - 1.0)))


def representing_measure(gauge: Anisotropy,
                         depth: int = DEFAULT_APPROX_DEPTH,
                         cache: Optional[HalfSpaceCache] = None) -> DirectionMeasure:
    """
    Discrete measure mu on S^1 with G(u) ~ sum_j m_j |<u, omega_j>|.

    Polygonal gauges are decomposed exactly (depth ignored); other gauges go through
    approximate_body at the given depth. The returned measure carries its uniform
    reconstruction error on the 720-direction grid and the 8/r mass bound of its polygon.
    """
    if gauge.dim != 2:
        raise UnsupportedDimensionError(f"Representing measures are constructed in the plane only, got dimension {gauge.dim}")

    if gauge.kind == 'polygonal':
        polygon, used_depth = gauge.polygon, None
    else:
        polygon, used_depth = approximate_body(gauge, depth, cache=cache), depth

    decomposition = polygon_decompose(polygon)
    atoms = decomposition.to_measure()
    measure = DirectionMeasure(atoms.omegas, atoms.masses, mass_bound=decomposition.weight_bound, depth=used_depth)
    error = reconstruction_error(measure, gauge)
    logger.debug(f"Representing measure with {len(measure)} atoms, mass {measure.total_mass:.6f}, error {error:.3e}")
    return DirectionMeasure(measure.omegas, measure.masses, error=error, mass_bound=measure.mass_bound,
                            depth=used_depth)


# ----------------------------------------
# Hypermetric search
# ----------------------------------------

@dataclass(frozen=True)
class HypermetricCertificate:
    points: Tuple[Tuple[float, ...], ...]
    coefficients: Tuple[int, ...]
    value: float

    def __post_init__(self):
        if sum(self.coefficients) != 1:
            raise DomainError(f"Hypermetric coefficients must sum to 1, got {self.coefficients}")
        if len(self.points) != len(self.coefficients):
            raise DomainError("Hypermetric certificate needs one coefficient per point")
        if not self.value > 0:
            raise DomainError("A hypermetric certificate must have a positive value")

    def to_json(self) -> Dict:
        return {'points': [list(p) for p in self.points], 'coefficients': list(self.coefficients),
                'value': self.value}


def hypermetric_value(norm: Anisotropy, points, coefficients) -> float:
    """sum_{i<j} x_i x_j d(P_i, P_j) with d the anisotropic norm distance."""
    P = np.asarray(points, dtype=float)
    x = np.asarray(coefficients, dtype=float)
    D = _distance_matrix(norm, P)
    return float(0.5 * x @ D @ x)


def _distance_matrix(norm: Anisotropy, P: np.ndarray) -> np.ndarray:
    diffs = (P[:, None, :] - P[None, :, :]).reshape(-1, P.shape[1])
    return anisotropic_norms(norm, diffs).reshape(P.shape[0], P.shape[0])


def default_point_grid(dim: int, radius: int = 1) -> np.ndarray:
    """The integer grid {-radius, ..., radius}^dim in lexicographic order."""
    axis = range(-radius, radius + 1)
    return np.array(list(itertools.product(axis, repeat=dim)), dtype=float)


def coefficient_vectors(size: int, bound: int) -> np.ndarray:
    """Integer vectors in ([-B, B] minus 0)^size with sum 1, lexicographic order."""
    values = [x for x in range(-bound, bound + 1) if x != 0]
    rows = [c for c in itertools.product(values, repeat=size) if sum(c) == 1]
    return np.array(rows, dtype=float).reshape(-1, size)


@dataclass(frozen=True)
class HypermetricSearchBudget:
    max_points: int
    coeff_bound: int
    grid_points: int

    def to_json(self) -> Dict:
        return {'max_points': self.max_points, 'coeff_bound': self.coeff_bound, 'grid_points': self.grid_points}


def hypermetric_search(norm: Anisotropy,
                       max_points: int = MAX_HYPERMETRIC_POINTS,
                       coeff_bound: int = 2,
                       point_grid=None,
                       tol: float = HYPERMETRIC_TOL,
                       threads: int = 1) -> Optional[HypermetricCertificate]:
    """
    Exhaustive search for a violated hypermetric inequality.

    Enumerates, for a = 2 .. max_points, every a-subset of the grid (lexicographic) and
    every coefficient vector with nonzero entries in [-B, B] summing to 1 (vectors with a
    zero entry are covered by a smaller subset). The first violation in this order is
    returned, independently of the thread count. None means no violation within the
    budget; it is not a proof that the norm is hypermetric.

    Args:
        norm: Convex anisotropy defining the metric
        max_points: Largest a (at most 7)
        coeff_bound: B
        point_grid: (m, dim) array of points (default {-1, 0, 1}^dim)
        tol: A value must exceed this to be certified
        threads: Worker threads for chunk evaluation

    Returns:
        HypermetricCertificate or None

    Raises:
        NonConvexAnisotropyError: If the norm fails the convexity check
        DomainError: If max_points is outside [2, 7]
    """
    if not (2 <= max_points <= MAX_HYPERMETRIC_POINTS):
        raise DomainError(f"max_points must lie in [2, {MAX_HYPERMETRIC_POINTS}], got {max_points}")
    report = check_convexity(norm)
    if not report.convex:
        raise NonConvexAnisotropyError(f"Anisotropy '{norm.label}' is not convex; hypermetric search needs a norm")

    grid = default_point_grid(norm.dim) if point_grid is None else np.asarray(point_grid, dtype=float)
    grid = np.unique(grid, axis=0) if point_grid is not None else grid
    D = _distance_matrix(norm, grid)
    executor = ParallelExecutor(num_workers=threads, phase_name="Hypermetric search")

    for a in range(2, min(max_points, grid.shape[0]) + 1):
        X = coefficient_vectors(a, coeff_bound)
        if X.shape[0] == 0:
            continue
        combos = itertools.combinations(range(grid.shape[0]), a)
        logger.debug(f"Hypermetric search: {math.comb(grid.shape[0], a)} subsets x {X.shape[0]} coefficient vectors at a={a}")

        def evaluate(chunk: np.ndarray, X=X) -> Optional[Tuple[int, int, float]]:
            sub = D[chunk[:, :, None], chunk[:, None, :]]
            values = 0.5 * np.einsum('ka,cab,kb->ck', X, sub, X, optimize=True)
            hits = np.argwhere(values > tol)
            if hits.size == 0:
                return None
            c, k = hits[0]
            return int(c), int(k), float(values[c, k])

        while True:
            window = []
            for _ in range(executor.num_workers):
                chunk = np.array(list(itertools.islice(combos, HYPERMETRIC_CHUNK)), dtype=int)
                if chunk.size == 0:
                    break
                window.append(chunk)
            if not window:
                break
            for chunk, hit in zip(window, executor.map_ordered(evaluate, window)):
                if hit is None:
                    continue
                c, k, value = hit
                subset = chunk[c]
                certificate = HypermetricCertificate(
                    points=tuple(tuple(float(x) for x in grid[i]) for i in subset),
                    coefficients=tuple(int(x) for x in X[k]),
                    value=value,
                )
                logger.info(f"Hypermetric violation found with a={a}: value {value:.6g}")
                return certificate

    logger.info(f"No hypermetric violation within budget (a <= {max_points}, B = {coeff_bound}, "
                f"{grid.shape[0]} grid points)")
    return None


@dataclass(frozen=True)
class IntegralGeometricStatus:
    status: str  # 'representable', 'not_representable' or 'undetermined'
    reason: str
    certificate: Optional[HypermetricCertificate] = None


def integral_geometric_status(sigma: Anisotropy,
                              max_points: int = 5,
                              coeff_bound: int = 2,
                              point_grid=None,
                              tol: float = HYPERMETRIC_TOL,
                              threads: int = 1) -> IntegralGeometricStatus:
    """
    Decide whether G_sigma is an integral-geometric norm, as far as a finite budget allows.

    Planar convex norms are always representable (the measure is constructive). In
    dimension >= 3 a norm is representable iff it is hypermetric: a found violation
    proves non-representability, no violation leaves the question undetermined.
    Euclidean (constant) norms are representable in every dimension. Only non-Euclidean
    norms in dimension >= 3 run hypermetric_search, with the given budget and tolerance.
    """
    if sigma.kind == 'constant':
        return IntegralGeometricStatus('representable', 'Euclidean norms are represented by the uniform measure')
    if sigma.dim == 2:
        _check_planar_convex(sigma)
        return IntegralGeometricStatus('representable', 'planar convex norm; measure built by representing_measure')

    certificate = hypermetric_search(sigma, max_points=max_points, coeff_bound=coeff_bound,
                                     point_grid=point_grid, tol=tol, threads=threads)
    if certificate is not None:
        return IntegralGeometricStatus('not_representable', 'hypermetric inequality violated', certificate)
    return IntegralGeometricStatus('undetermined', 'no hypermetric violation within the search budget')
