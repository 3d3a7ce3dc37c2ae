# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Numerical experiments built on the library: lower semicontinuity along flat-converging
sequences, the slicing identity on concrete currents, and the branching transition of
one-parameter problem families.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from src.constants import DEFAULT_APPROX_DEPTH
from .anisotropy import Anisotropy, BranchingFunction
from .currents import PolyhedralOneCurrent, canonicalize, h_mass, h_mass_via_slicing
from .errors import DomainError, UnsupportedDimensionError
from .flat_norm import Triangulation, flat_distance_one_upper
from .igrep import representing_measure
from .solver import SolveBudget, TransportProblem, solve

logger = logging.getLogger(__name__)

LSC_FAMILIES = ('staircase', 'oscillation')

# Slack allowed on the liminf inequality
LSC_TOL = 1e-9


# ----------------------------------------
# Sequence families
# ----------------------------------------

def diagonal() -> PolyhedralOneCurrent:
    """Unit-multiplicity segment (0,0) -> (1,1)."""
    return PolyhedralOneCurrent.from_edges([((0.0, 0.0), (1.0, 1.0), 1.0)])


def staircase(k: int) -> PolyhedralOneCurrent:
    """k right-then-up steps of size 1/k from (0,0) to (1,1)."""
    if k < 1:
        raise DomainError(f"Staircase needs k >= 1, got {k}")
    points = [(0.0, 0.0)]
    for i in range(k):
        points.append(((i + 1) / k, i / k))
        points.append(((i + 1) / k, (i + 1) / k))
    return PolyhedralOneCurrent.polyline(points)


def staircase_mesh(k: int) -> Triangulation:
    """k x k grid of the unit square cut along lower-left to upper-right diagonals."""
    return Triangulation.grid(k, k, diagonal='up')


def segment() -> PolyhedralOneCurrent:
    """Unit-multiplicity segment (0,0) -> (1,0)."""
    return PolyhedralOneCurrent.from_edges([((0.0, 0.0), (1.0, 0.0), 1.0)])


def _oscillation_points(k: int) -> np.ndarray:
    xs = np.arange(2 * k + 1) / (2 * k)
    ys = np.where(np.arange(2 * k + 1) % 2 == 1, 1.0 / (2 * k), 0.0)
    return np.stack([xs, ys], axis=1)


def oscillation(k: int) -> PolyhedralOneCurrent:
    """k teeth at 45 degrees of height 1/(2k) along (0,0) -> (1,0); length sqrt(2) for every k."""
    if k < 1:
        raise DomainError(f"Oscillation needs k >= 1, got {k}")
    return PolyhedralOneCurrent.polyline(_oscillation_points(k))


def oscillation_mesh(k: int) -> Triangulation:
    """The k tooth triangles; they contain every edge of oscillation(k) and of the segment."""
    points = _oscillation_points(k)
    triangles = [(2 * j, 2 * j + 1, 2 * j + 2) for j in range(k)]
    return Triangulation(points, np.array(triangles))


FAMILIES: Dict[str, Tuple[Callable[[], PolyhedralOneCurrent], Callable[[int], PolyhedralOneCurrent],
                          Callable[[int], Triangulation]]] = {
    'staircase': (diagonal, staircase, staircase_mesh),
    'oscillation': (segment, oscillation, oscillation_mesh),
}


# ----------------------------------------
# Lower semicontinuity
# ----------------------------------------

@dataclass(frozen=True)
class LscRow:
    k: int
    flat_bound: float
    h_mass: float


@dataclass(frozen=True)
class LscExperiment:
    family: str
    rows: List[LscRow]
    limit_h_mass: float
    liminf_ok: bool
    flat_decreasing: bool
    recovery_flat: float = 0.0
    recovery_h_mass: float = 0.0
    note: str = ""

    @property
    def min_h_mass(self) -> float:
        return min(r.h_mass for r in self.rows)


def lsc_experiment(family: str, ks: Sequence[int], H: BranchingFunction, sigma: Anisotropy,
                   tol: float = LSC_TOL) -> LscExperiment:
    """
    Flat upper bounds and H-masses of a sequence converging to its limit current.

    Checks min_k h_mass(S_k) >= h_mass(D) - tol and that the flat bounds strictly
    decrease in k. The recovery side is reported for the polyhedral limit itself,
    which is its own recovery sequence.

    Raises:
        DomainError: On an unknown family or an empty k list
    """
    if family not in FAMILIES:
        raise DomainError(f"Unknown sequence family '{family}', expected one of {list(LSC_FAMILIES)}")
    ks = sorted(int(k) for k in ks)
    if not ks:
        raise DomainError("At least one k is required")

    limit_fn, member_fn, mesh_fn = FAMILIES[family]
    D = limit_fn()
    limit = h_mass(D, H, sigma)
    rows = []
    for k in ks:
        S = member_fn(k)
        rows.append(LscRow(k=k, flat_bound=flat_distance_one_upper(S, D, mesh_fn(k)), h_mass=h_mass(S, H, sigma)))
        logger.debug(f"{family} k={k}: flat bound {rows[-1].flat_bound:.6g}, H-mass {rows[-1].h_mass:.6g}")

    bounds = [r.flat_bound for r in rows]
    result = LscExperiment(
        family=family,
        rows=rows,
        limit_h_mass=limit,
        liminf_ok=min(r.h_mass for r in rows) >= limit - tol,
        flat_decreasing=all(b1 < b0 for b0, b1 in zip(bounds[:-1], bounds[1:])),
        recovery_flat=0.0,
        recovery_h_mass=limit,
        note="polyhedral limit: recovery sequence is the limit itself",
    )
    if not result.liminf_ok:
        logger.warning(f"{family}: min H-mass {result.min_h_mass:.10g} below limit {limit:.10g}")
    return result


# ----------------------------------------
# Slicing identity
# ----------------------------------------

@dataclass(frozen=True)
class SlicingRow:
    instance: str
    direct: float
    sliced: float
    diff: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.diff <= self.bound


def verify_slicing(instances: Sequence[Tuple[str, PolyhedralOneCurrent]], gauge: Anisotropy, H: BranchingFunction,
                   depth: int = DEFAULT_APPROX_DEPTH, rel_tol: float = 1e-8) -> List[SlicingRow]:
    """
    Compare the direct H-mass with its slicing formula under a representing measure of
    the gauge. The allowed gap is delta * sum_e H(|theta_e|) G(b_e - a_e) plus rel_tol
    relative slack, where delta is the measure's reconstruction error.

    Raises:
        UnsupportedDimensionError: If the gauge or a current is not planar
    """
    if gauge.dim != 2:
        raise UnsupportedDimensionError(f"Slicing verification is planar, got dimension {gauge.dim}")
    mu = representing_measure(gauge, depth)
    rows = []
    for name, P in instances:
        C = canonicalize(P)
        if len(C) and C.dim != 2:
            raise UnsupportedDimensionError(f"Instance '{name}' is {C.dim}-dimensional")
        direct = h_mass(C, H, gauge)
        sliced = h_mass_via_slicing(C, H, mu)
        rows.append(SlicingRow(instance=name, direct=direct, sliced=sliced, diff=abs(direct - sliced),
                               bound=mu.error * direct + rel_tol * max(1.0, direct)))
    return rows


# ----------------------------------------
# Branching transition
# ----------------------------------------

def y_instance(h: float, H: Optional[BranchingFunction] = None, sigma: Optional[Anisotropy] = None) -> TransportProblem:
    """Sources (+-1, 0) of mass 1 and one target (0, h) of mass 2."""
    return TransportProblem.from_atoms([((-1.0, 0.0), 1.0), ((1.0, 0.0), 1.0)], [((0.0, h), 2.0)],
                                       H or BranchingFunction.power(0.5), sigma or Anisotropy.euclidean(2),
                                       label=f"y(h={h:g})")


def branches(problem: TransportProblem, budget: Optional[SolveBudget] = None, seed: int = 0) -> bool:
    """Whether the solved network keeps a Steiner point away from every terminal."""
    return solve(problem, budget, seed=seed).best.n_branch_points > 0


def locate_branch_crossover(make_problem: Callable[[float], TransportProblem], lo: float, hi: float,
                            tol: float = 1e-4, has_branch: Optional[Callable[[TransportProblem], bool]] = None,
                            max_steps: int = 60) -> float:
    """
    Bisection on a problem parameter for the switch between no branching at `lo` and
    branching at `hi`.

    Raises:
        DomainError: If both ends give the same answer
    """
    test = has_branch or branches
    low_branch, high_branch = test(make_problem(lo)), test(make_problem(hi))
    if low_branch == high_branch:
        raise DomainError(f"No branching transition on [{lo}, {hi}]")
    for _ in range(max_steps):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if test(make_problem(mid)) == high_branch:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def y_height_oracle(h: float, H: Optional[BranchingFunction] = None) -> Tuple[float, float]:
    """
    Bounded scalar minimization of the symmetric Y cost over the Steiner height s in [0, h]
    (Euclidean). Returns (s*, cost).
    """
    H = H or BranchingFunction.power(0.5)

    def cost(s: float) -> float:
        return 2 * H(1.0) * float(np.hypot(1.0, s)) + H(2.0) * (h - s)

    res = minimize_scalar(cost, bounds=(0.0, h), method='bounded', options={'xatol': 1e-12})
    return float(res.x), float(res.fun)

