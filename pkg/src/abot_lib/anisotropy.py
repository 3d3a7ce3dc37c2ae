# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Cost primitives for anisotropic branched transport.

This module provides:
- BranchingFunction: even, subadditive multiplicity costs H with H(0) = 0
- SymmetricPolygon: centrally symmetric convex polygons used as unit balls
- Anisotropy: direction costs on unoriented lines (constant, polygonal or functional)
- Anisotropic norms G_sigma(v) = |v| sigma(v/|v|) and convexity checks
- Planar line geometry helpers (Jacobian, bracket, Grassmannian distance)
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from src.constants import (
    AXIOM_TOL,
    AXIOM_GRID_POINTS,
    BLOWUP_PROBES,
    CONVEXITY_SAMPLES,
    CONVEXITY_TOL,
    DIRECTION_GRID_SIZE,
)
from .errors import DegenerateEdgeError, DimensionMismatchError, DomainError

logger = logging.getLogger(__name__)

BRANCHING_KINDS = ('power', 'affine_jump', 'tabulated')
ANISOTROPY_KINDS = ('constant', 'polygonal', 'functional')


# ----------------------------------------
# Branching functions
# ----------------------------------------

@dataclass(frozen=True)
class BranchingFunction:
    """
    Multiplicity cost H. Use the `power`, `affine_jump` and `tabulated` constructors.

    power(alpha):        H(y) = |y|^alpha, alpha in (0, 1]
    affine_jump(a, b):   H(0) = 0, H(y) = a + b|y| otherwise
    tabulated(knots):    piecewise linear through (0, 0) and the knots, last slope
                         extended (clamped at zero) beyond the final knot
    """

    kind: str
    alpha: float = 1.0
    a: float = 0.0
    b: float = 0.0
    knots: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in BRANCHING_KINDS:
            raise DomainError(f"Unknown branching function kind '{self.kind}'")
        if self.kind == 'power' and not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"power exponent must lie in (0, 1], got {self.alpha}")
        if self.kind == 'affine_jump':
            if self.a < 0 or self.b < 0 or not (math.isfinite(self.a) and math.isfinite(self.b)):
                raise DomainError(f"affine_jump needs finite a >= 0 and b >= 0, got a={self.a}, b={self.b}")
        if self.kind == 'tabulated':
            if not self.knots:
                raise DomainError("tabulated branching function needs at least one knot")
            ys = [k[0] for k in self.knots]
            costs = [k[1] for k in self.knots]
            if any(y <= 0 for y in ys) or any(np.diff(ys) <= 0):
                raise DomainError("tabulated knots need strictly increasing positive multiplicities")
            if any(c < 0 or not math.isfinite(c) for c in costs):
                raise DomainError("tabulated costs must be finite and non-negative")

    @classmethod
    def power(cls, alpha: float) -> 'BranchingFunction':
        return cls(kind='power', alpha=float(alpha))

    @classmethod
    def affine_jump(cls, a: float, b: float) -> 'BranchingFunction':
        return cls(kind='affine_jump', a=float(a), b=float(b))

    @classmethod
    def tabulated(cls, knots: Sequence[Tuple[float, float]]) -> 'BranchingFunction':
        return cls(kind='tabulated', knots=tuple((float(y), float(c)) for y, c in knots))

    @property
    def is_linear(self) -> bool:
        """True when H(y) = b|y| for some b (classical transport, no branching incentive)."""
        if self.kind == 'power':
            return self.alpha == 1.0
        if self.kind == 'affine_jump':
            return self.a == 0.0
        slopes = self._slopes()
        return bool(np.allclose(slopes, slopes[0], rtol=0, atol=AXIOM_TOL))

    def _slopes(self) -> np.ndarray:
        ys = np.array([0.0] + [k[0] for k in self.knots])
        cs = np.array([0.0] + [k[1] for k in self.knots])
        return np.diff(cs) / np.diff(ys)

    def evaluate(self, theta) -> np.ndarray:
        """Vectorized H(|theta|). No finiteness check; see eval_branching."""
        y = np.abs(np.asarray(theta, dtype=float))
        if self.kind == 'power':
            return y ** self.alpha
        if self.kind == 'affine_jump':
            return np.where(y > 0, self.a + self.b * y, 0.0)

        ys = np.array([0.0] + [k[0] for k in self.knots])
        cs = np.array([0.0] + [k[1] for k in self.knots])
        inside = np.interp(y, ys, cs)
        tail_slope = max(0.0, float(self._slopes()[-1]))
        return np.where(y > ys[-1], cs[-1] + tail_slope * (y - ys[-1]), inside)

    def __call__(self, theta: float) -> float:
        return eval_branching(self, theta)

    def describe(self) -> Dict:
        if self.kind == 'power':
            return {'kind': 'power', 'alpha': self.alpha}
        if self.kind == 'affine_jump':
            return {'kind': 'affine_jump', 'a': self.a, 'b': self.b}
        return {'kind': 'tabulated', 'knots': [list(k) for k in self.knots]}


def eval_branching(H: BranchingFunction, theta: float) -> float:
    """
    Evaluate H at a multiplicity.

    Args:
        H: Branching function
        theta: Multiplicity (any sign)

    Returns:
        H(|theta|), exactly 0 for theta = 0

    Raises:
        DomainError: If theta is not finite
    """
    theta = float(theta)
    if not math.isfinite(theta):
        raise DomainError(f"Multiplicity must be finite, got {theta}")
    if theta == 0.0:
        return 0.0
    return float(H.evaluate(theta))


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    witness: Tuple[float, ...]
    amount: float


@dataclass(frozen=True)
class BranchingAxiomReport:
    even_ok: bool
    subadditive_ok: bool
    monotone_ok: bool
    derivative_blowup_ok: bool
    violations: Dict[str, AxiomViolation]
    grid: Tuple[float, ...]
    tol: float

    @property
    def all_ok(self) -> bool:
        return self.even_ok and self.subadditive_ok and self.monotone_ok and self.derivative_blowup_ok

    @property
    def worst_violation(self) -> Optional[AxiomViolation]:
        if not self.violations:
            return None
        return max(self.violations.values(), key=lambda v: v.amount)


def default_axiom_grid(points: int = AXIOM_GRID_POINTS, upper: float = 5.0) -> np.ndarray:
    return np.linspace(upper / points, upper, points)


def check_branching_axioms(H: BranchingFunction,
                           grid: Optional[Sequence[float]] = None,
                           tol: float = AXIOM_TOL) -> BranchingAxiomReport:
    """
    Check evenness, subadditivity, monotonicity and the blow-up of H(y)/y at 0+.

    Subadditivity is checked on every ordered pair of grid values, monotonicity on
    the sorted grid, and the blow-up on the fixed probes 1e-1 ... 1e-8.

    Args:
        H: Branching function to check
        grid: Positive sample multiplicities (default: 100 points on (0, 5])
        tol: Absolute tolerance

    Returns:
        BranchingAxiomReport with one entry in `violations` per failed axiom
    """
    ys = np.sort(np.abs(np.asarray(default_axiom_grid() if grid is None else grid, dtype=float)))
    if ys.size == 0:
        raise DomainError("Axiom grid must be nonempty")

    violations: Dict[str, AxiomViolation] = {}

    values = H.evaluate(ys)
    odd_gap = np.abs(H.evaluate(-ys) - values)
    i = int(np.argmax(odd_gap))
    if odd_gap[i] > tol or H.evaluate(0.0) != 0.0:
        violations['even'] = AxiomViolation('even', (float(ys[i]),), float(max(odd_gap[i], abs(H.evaluate(0.0)))))

    sums = H.evaluate(ys[:, None] + ys[None, :])
    excess = sums - values[:, None] - values[None, :]
    flat = int(np.argmax(excess))
    i, j = np.unravel_index(flat, excess.shape)
    if excess[i, j] > tol:
        violations['subadditive'] = AxiomViolation('subadditive', (float(ys[i]), float(ys[j])),
                                                   float(excess[i, j]))

    drops = values[:-1] - values[1:]
    if drops.size and drops.max() > tol:
        i = int(np.argmax(drops))
        violations['monotone'] = AxiomViolation('monotone', (float(ys[i]), float(ys[i + 1])), float(drops[i]))

    probes = np.array(BLOWUP_PROBES)
    ratios = H.evaluate(probes) / probes
    steps = ratios[:-1] - ratios[1:]
    if np.any(steps >= 0):
        i = int(np.argmax(steps))
        violations['derivative_blowup'] = AxiomViolation(
            'derivative_blowup', (float(probes[i]), float(probes[i + 1])), float(max(steps[i], 0.0)))

    return BranchingAxiomReport(
        even_ok='even' not in violations,
        subadditive_ok='subadditive' not in violations,
        monotone_ok='monotone' not in violations,
        derivative_blowup_ok='derivative_blowup' not in violations,
        violations=violations,
        grid=tuple(float(y) for y in ys),
        tol=tol,
    )


# ----------------------------------------
# Planar geometry helpers
# ----------------------------------------

def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def rot90(v: np.ndarray) -> np.ndarray:
    """Rotate planar vectors (last axis) by +90 degrees."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def cross2(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    return u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0]


def canonical_sign(U: np.ndarray) -> np.ndarray:
    """Flip each row so its first nonzero coordinate is positive (one representative per line)."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    nonzero = U != 0
    first = np.argmax(nonzero, axis=1)
    signs = np.sign(U[np.arange(U.shape[0]), first])
    signs[signs == 0] = 1.0
    return U * signs[:, None]


def direction_grid(dim: int, size: int = DIRECTION_GRID_SIZE) -> np.ndarray:
    """
    Deterministic unit directions covering the unoriented sphere.

    Planar grids are the angles k*pi/size, k < size. In dimension 3 a Fibonacci
    lattice on the upper hemisphere is used; higher dimensions fall back to seeded
    Gaussian samples.
    """
    if dim == 2:
        phi = np.pi * np.arange(size) / size
        return np.stack([np.cos(phi), np.sin(phi)], axis=1)
    if dim == 3:
        k = np.arange(size) + 0.5
        z = k / size
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (1.0 + 5.0 ** 0.5) * k
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    rng = np.random.default_rng(0)
    U = rng.normal(size=(size, dim))
    return canonical_sign(U / np.linalg.norm(U, axis=1, keepdims=True))


# ----------------------------------------
# Symmetric polygons
# ----------------------------------------

@dataclass(frozen=True, eq=False)
class SymmetricPolygon:
    """
    Centrally symmetric, strictly convex polygon with counterclockwise vertices v_1..v_2N
    and v_{i+N} = -v_i exactly. The origin is its center.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise DimensionMismatchError(f"Polygon vertices must be planar points, got shape {v.shape}")
        if v.shape[0] < 4 or v.shape[0] % 2:
            raise DomainError(f"A symmetric polygon needs an even number (>= 4) of vertices, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise DomainError("Polygon vertices must be finite")
        half = v.shape[0] // 2
        if not np.array_equal(v[half:], -v[:half]):
            raise DomainError("Polygon is not centrally symmetric (v[i+N] != -v[i])")

        edges = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(edges, axis=1)
        if np.any(lengths == 0):
            raise DegenerateEdgeError(f"Polygon has a zero-length edge at index {int(np.argmin(lengths))}")
        turns = cross2(edges, np.roll(edges, -1, axis=0))
        if np.any(turns <= 1e-12 * lengths * np.roll(lengths, -1)):
            raise DomainError("Polygon vertices must be counterclockwise and strictly convex")
        if np.any(cross2(v, np.roll(v, -1, axis=0)) <= 0):
            raise DomainError("Origin must lie strictly inside the polygon")

        v.setflags(write=False)
        object.__setattr__(self, 'vertices', v)

    @classmethod
    def from_half(cls, half: Sequence[Sequence[float]]) -> 'SymmetricPolygon':
        """Build the polygon from v_1..v_N; the antipodal half is exact negation."""
        h = np.asarray(half, dtype=float)
        return cls(np.concatenate([h, -h], axis=0))

    @classmethod
    def regular(cls, N: int, circumradius: float = 1.0, phase: float = 0.0) -> 'SymmetricPolygon':
        """Regular 2N-gon."""
        if N < 2:
            raise DomainError("regular polygon needs N >= 2")
        phi = phase + np.pi * np.arange(N) / N
        return cls.from_half(circumradius * np.stack([np.cos(phi), np.sin(phi)], axis=1))

    @classmethod
    def random_symmetric(cls, rng: np.random.Generator, N: int, min_gap: float = 1e-2) -> 'SymmetricPolygon':
        """
        Random 2N-gon with vertices on a random centered ellipse (always strictly convex).

        Args:
            rng: Seeded numpy generator
            N: Number of antipodal vertex pairs
            min_gap: Minimum angular gap between consecutive vertices (radians)
        """
        if N < 2:
            raise DomainError("random symmetric polygon needs N >= 2")
        gap = min(min_gap, np.pi / (4 * N))
        while True:
            phi = np.sort(rng.uniform(0.0, np.pi, size=N))
            gaps = np.diff(np.concatenate([phi, [phi[0] + np.pi]]))
            if gaps.min() > gap:
                break
        a, b = rng.uniform(0.5, 1.5, size=2)
        tilt = rng.uniform(0.0, np.pi)
        ellipse = np.stack([a * np.cos(phi), b * np.sin(phi)], axis=1)
        return cls.from_half(ellipse @ rotation_matrix(tilt).T)

    @property
    def n_pairs(self) -> int:
        return self.vertices.shape[0] // 2

    @property
    def half(self) -> np.ndarray:
        return self.vertices[:self.n_pairs]

    def rotated(self, angle: float) -> 'SymmetricPolygon':
        return SymmetricPolygon.from_half(self.half @ rotation_matrix(angle).T)

    def support_normals(self) -> np.ndarray:
        """Normals n_i with <n_i, x> = 1 on the edge v_i -> v_{i+1}."""
        v = self.vertices
        edges = np.roll(v, -1, axis=0) - v
        outward = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
        return outward / cross2(v, np.roll(v, -1, axis=0))[:, None]

    def gauge(self, v) -> np.ndarray:
        """Minkowski gauge max_i <n_i, v>, vectorized over the last axis."""
        v = np.asarray(v, dtype=float)
        return np.max(v @ self.support_normals().T, axis=-1)

    def inradius(self) -> float:
        return float(1.0 / np.max(np.linalg.norm(self.support_normals(), axis=1)))

    def circumradius(self) -> float:
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def boundary_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniformly chosen edges and positions along them."""
        v = self.vertices
        idx = rng.integers(0, v.shape[0], size=count)
        t = rng.uniform(0.0, 1.0, size=count)[:, None]
        return (1 - t) * v[idx] + t * v[(idx + 1) % v.shape[0]]

    def to_list(self) -> List[List[float]]:
        return self.vertices.tolist()


# ----------------------------------------
# Anisotropies
# ----------------------------------------

@dataclass(frozen=True, eq=False)
class Anisotropy:
    """
    Positive cost sigma(u) on unoriented directions of R^dim.

    kind 'constant' stores `c`; 'polygonal' stores the unit ball `polygon` (planar);
    'functional' stores `func`, a vectorized map from an (m, dim) array of unit rows
    (sign-canonicalized) to m positive costs.
    """

    dim: int
    kind: str
    c: float = 1.0
    polygon: Optional[SymmetricPolygon] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in ANISOTROPY_KINDS:
            raise DomainError(f"Unknown anisotropy kind '{self.kind}'")
        if self.dim < 2:
            raise DomainError(f"Anisotropy dimension must be >= 2, got {self.dim}")
        if self.kind == 'constant' and not (self.c > 0 and math.isfinite(self.c)):
            raise DomainError(f"Constant anisotropy needs finite c > 0, got {self.c}")
        if self.kind == 'polygonal':
            if self.polygon is None or self.dim != 2:
                raise DomainError("Polygonal anisotropy needs a planar SymmetricPolygon")
        if self.kind == 'functional':
            if self.func is None:
                raise DomainError("Functional anisotropy needs a callable")
            costs = self.direction_cost(direction_grid(self.dim, 64))
            if not np.all(np.isfinite(costs)) or np.any(costs <= 0):
                raise DomainError(f"Anisotropy '{self.label}' must be finite and positive on every direction")

    @classmethod
    def constant(cls, c: float = 1.0, dim: int = 2) -> 'Anisotropy':
        return cls(dim=dim, kind='constant', c=float(c), label=f"constant({c})")

    @classmethod
    def euclidean(cls, dim: int = 2) -> 'Anisotropy':
        return cls(dim=dim, kind='constant', c=1.0, label='euclidean')

    @classmethod
    def polygonal(cls, ball) -> 'Anisotropy':
        polygon = ball if isinstance(ball, SymmetricPolygon) else SymmetricPolygon(ball)
        return cls(dim=2, kind='polygonal', polygon=polygon, label=f"polygonal({polygon.vertices.shape[0]})")

    @classmethod
    def from_norm(cls, norm: Callable[[np.ndarray], np.ndarray], dim: int, label: str = "norm") -> 'Anisotropy':
        """sigma(u) := G(u) for unit u, where G is a vectorized norm on rows."""
        return cls(dim=dim, kind='functional', func=norm, label=label)

    @classmethod
    def lp(cls, p: float, dim: int = 2) -> 'Anisotropy':
        """
        The l^p norm as an anisotropy. Planar l^1 and l^inf are returned as exact
        polygons, l^2 as the Euclidean constant; everything else is functional.
        """
        p = float(p)
        if p < 1:
            raise DomainError(f"l^p needs p >= 1, got {p}")
        if p == 2:
            return cls.euclidean(dim)
        if dim == 2 and p == 1:
            return cls(dim=2, kind='polygonal', polygon=SymmetricPolygon.from_half([[1, 0], [0, 1]]), label='l1')
        if dim == 2 and math.isinf(p):
            return cls(dim=2, kind='polygonal', polygon=SymmetricPolygon.from_half([[1, 1], [-1, 1]]), label='linf')
        label = 'linf' if math.isinf(p) else f"l{p:g}"
        return cls.from_norm(lambda U: np.linalg.norm(U, ord=p, axis=1), dim, label=label)

    @classmethod
    def fourier(cls, c0: float, cos: Sequence[float] = (), sin: Sequence[float] = ()) -> 'Anisotropy':
        """Planar sigma(phi) = c0 + sum_k a_k cos(k phi) + b_k sin(k phi), phi the angle of the line in (-pi/2, pi/2]."""
        a = np.asarray(cos, dtype=float)
        b = np.asarray(sin, dtype=float)

        def sigma(U: np.ndarray) -> np.ndarray:
            phi = np.arctan2(U[:, 1], U[:, 0])
            out = np.full(U.shape[0], float(c0))
            for k, coef in enumerate(a, start=1):
                out += coef * np.cos(k * phi)
            for k, coef in enumerate(b, start=1):
                out += coef * np.sin(k * phi)
            return out

        return cls(dim=2, kind='functional', func=sigma, label=f"fourier({c0})")

    def direction_cost(self, U) -> np.ndarray:
        """sigma on an (m, dim) array of unit rows."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if self.kind == 'constant':
            return np.full(U.shape[0], self.c)
        if self.kind == 'polygonal':
            return self.polygon.gauge(U)
        return np.asarray(self.func(canonical_sign(U)), dtype=float)

    def rotated(self, angle: float) -> 'Anisotropy':
        """The anisotropy whose unit ball is this one rotated by `angle` (planar)."""
        if self.dim != 2:
            raise DomainError("Rotation is only defined for planar anisotropies")
        if self.kind == 'constant':
            return self
        if self.kind == 'polygonal':
            return Anisotropy.polygonal(self.polygon.rotated(angle))
        back = rotation_matrix(-angle)
        return Anisotropy(dim=2, kind='functional', func=lambda U: self.direction_cost(U @ back.T),
                          label=f"{self.label}@{angle:g}")

    def describe(self) -> Dict:
        out = {'kind': self.kind, 'dim': self.dim, 'label': self.label}
        if self.kind == 'constant':
            out['c'] = self.c
        elif self.kind == 'polygonal':
            out['vertices'] = self.polygon.to_list()
        return out


def anisotropic_norms(sigma: Anisotropy, V) -> np.ndarray:
    """
    Vectorized G_sigma on the rows of V.

    Args:
        sigma: Anisotropy
        V: Array of shape (m, dim)

    Returns:
        Array of m costs |v| sigma(v/|v|), with 0 for zero rows

    Raises:
        DimensionMismatchError: If the row dimension differs from sigma.dim
        DomainError: If V has non-finite entries
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.shape[1] != sigma.dim:
        raise DimensionMismatchError(f"Vector dimension {V.shape[1]} does not match anisotropy dimension {sigma.dim}")
    if not np.all(np.isfinite(V)):
        raise DomainError("Vectors must be finite")

    if sigma.kind == 'polygonal':
        return np.where(np.any(V != 0, axis=1), sigma.polygon.gauge(V), 0.0)

    lengths = np.linalg.norm(V, axis=1)
    if sigma.kind == 'constant':
        return sigma.c * lengths

    out = np.zeros(V.shape[0])
    nonzero = lengths > 0
    if np.any(nonzero):
        out[nonzero] = lengths[nonzero] * sigma.direction_cost(V[nonzero] / lengths[nonzero, None])
    return out


def anisotropic_norm(sigma: Anisotropy, v) -> float:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatchError(f"Expected a single vector, got shape {v.shape}")
    return float(anisotropic_norms(sigma, v[None, :])[0])


def min_direction_cost(sigma: Anisotropy, size: int = DIRECTION_GRID_SIZE) -> float:
    """min over unit u of sigma(u); exact for constant and polygonal anisotropies."""
    if sigma.kind == 'constant':
        return sigma.c
    if sigma.kind == 'polygonal':
        return 1.0 / sigma.polygon.circumradius()
    return float(np.min(sigma.direction_cost(direction_grid(sigma.dim, size))))


def unit_sphere_points(sigma: Anisotropy, size: int = DIRECTION_GRID_SIZE) -> np.ndarray:
    """Points u / G(u) of the unit sphere of G_sigma along `size` directions of the full circle (planar)."""
    phi = 2 * np.pi * np.arange(size) / size
    U = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    return U / anisotropic_norms(sigma, U)[:, None]


@dataclass(frozen=True)
class ConvexityReport:
    convex: bool
    worst_defect: float
    witness: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None
    hull_defect: Optional[float] = None
    samples: int = 0


def check_convexity(sigma: Anisotropy,
                    samples: int = CONVEXITY_SAMPLES,
                    tol: float = CONVEXITY_TOL) -> ConvexityReport:
    """
    Check the triangle inequality of G_sigma over all pairs of sample vectors.

    The sample set holds the grid directions, their negatives and the matching points
    of the unit sphere of G_sigma. Constant and polygonal anisotropies are norms by
    construction and short-circuit to convex. In the plane the report also carries the
    convex-hull defect of the sampled unit ball: max of 1 - (hull gauge) over the
    sampled sphere points, positive exactly when some sampled point is interior to the hull.
    """
    if sigma.kind in ('constant', 'polygonal'):
        return ConvexityReport(convex=True, worst_defect=0.0, hull_defect=0.0 if sigma.dim == 2 else None)

    U = direction_grid(sigma.dim, samples)
    U = np.concatenate([U, -U], axis=0)
    costs = anisotropic_norms(sigma, U)
    V = np.concatenate([U, U / costs[:, None]], axis=0)
    G = np.concatenate([costs, np.ones_like(costs)])

    worst = -np.inf
    witness = None
    chunk = max(1, 2 ** 20 // V.shape[0])
    for start in range(0, V.shape[0], chunk):
        block = V[start:start + chunk]
        sums = (block[:, None, :] + V[None, :, :]).reshape(-1, sigma.dim)
        defect = anisotropic_norms(sigma, sums).reshape(block.shape[0], V.shape[0])
        defect -= G[start:start + chunk, None] + G[None, :]
        k = int(np.argmax(defect))
        i, j = np.unravel_index(k, defect.shape)
        if defect[i, j] > worst:
            worst = float(defect[i, j])
            witness = (tuple(block[i].tolist()), tuple(V[j].tolist()))

    hull_defect = None
    if sigma.dim == 2:
        boundary = unit_sphere_points(sigma, 2 * samples)
        hull = ConvexHull(boundary)
        normals = hull.equations[:, :2] / -hull.equations[:, 2:3]
        hull_gauge = np.max(boundary @ normals.T, axis=1)
        hull_defect = float(max(0.0, np.max(1.0 - hull_gauge)))

    convex = worst <= tol
    if not convex:
        logger.debug(f"Anisotropy '{sigma.label}' violates the triangle inequality by {worst:.3e}")
    return ConvexityReport(convex=convex, worst_defect=max(worst, 0.0), witness=None if convex else witness,
                           hull_defect=hull_defect, samples=V.shape[0])


# ----------------------------------------
# Line geometry
# ----------------------------------------

def _pair(u, w) -> Tuple[np.ndarray, np.ndarray, float, float]:
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.shape != w.shape:
        raise DimensionMismatchError(f"Direction shapes differ: {u.shape} vs {w.shape}")
    nu, nw = float(np.linalg.norm(u)), float(np.linalg.norm(w))
    if nu == 0 or nw == 0:
        raise DomainError("Direction vectors must be nonzero")
    return u, w, nu, nw


def line_jacobian(u, w) -> float:
    """J(L_u, L_w) = |cos angle| = |<u, w>| for unit u, w."""
    u, w, nu, nw = _pair(u, w)
    return float(min(1.0, abs(float(np.dot(u, w))) / (nu * nw)))


def line_bracket(u, w) -> float:
    """[L_u, L_w] = |sin angle| for planar lines: the Jacobian against w rotated by 90 degrees."""
    u, w, _, _ = _pair(u, w)
    if u.shape != (2,):
        raise DimensionMismatchError("line_bracket is defined for planar directions")
    return line_jacobian(u, rot90(w))


def grassmann_distance(u, w) -> float:
    """Operator norm of the difference of the orthogonal projections onto L_u and L_w."""
    u, w, nu, nw = _pair(u, w)
    u, w = u / nu, w / nw
    return float(np.linalg.norm(np.outer(u, u) - np.outer(w, w), ord=2))
