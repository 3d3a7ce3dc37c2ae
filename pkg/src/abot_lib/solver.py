# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Desk-scale anisotropic branched transport between atomic measures.

Competitors are trees over the source and target atoms plus Steiner points. For a fixed
topology the multiplicities are forced by conservation and the cost
sum_e H(|theta_e|) G_sigma(x_v - x_u) is convex in the Steiner positions, so each
topology is an inner convex problem; the outer search is exhaustive for up to six
terminals or a seeded local search beyond.
"""

import functools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from src.constants import (AXIOM_TOL, GEOM_TOL, MAX_ORACLE_GRID, MAX_ORACLE_STEINER, MAX_ORACLE_TERMINALS,
                           OPTIMIZER_TOL, ZERO_WEIGHT_TOL)
from src.parallel_executor import ParallelExecutor
from .anisotropy import (Anisotropy, BranchingFunction, anisotropic_norms, check_branching_axioms,
                         check_convexity, rotation_matrix)
from .currents import (PolyhedralOneCurrent, ZeroCurrent, boundary, h_mass, is_acyclic, mass,
                       mass_bound_constant, max_multiplicity, remove_cycles)
from .errors import (DimensionMismatchError, DomainError, NonConvexAnisotropyError,
                     NumericalDegeneracyError, SizeLimitError, UnbalancedProblemError)
from .topology import (Topology, enumerate_topologies, neighbor_topologies, random_topology,
                       star_topology, topology_from_pairs)

logger = logging.getLogger(__name__)

# Relative gap under which two exhaustive-mode costs count as a tie
TIE_TOL = 1e-9

# Cost decrease below which subgradient descent stops, checked every this many iterations
SUBGRADIENT_WINDOW = 100

# Balance tolerance relative to the total mass
BALANCE_TOL = 1e-12


# ----------------------------------------
# Problem and network values
# ----------------------------------------

@dataclass(frozen=True, eq=False)
class TransportProblem:
    """
    Atomic sources and targets of equal total mass, with the branching function and
    anisotropy that price a network. Terminals are numbered sources first.
    """

    source_points: np.ndarray
    source_masses: np.ndarray
    target_points: np.ndarray
    target_masses: np.ndarray
    H: BranchingFunction
    sigma: Anisotropy
    label: str = ""

    def __post_init__(self):
        arrays = {}
        for name in ('source_points', 'target_points'):
            pts = np.array(getattr(self, name), dtype=float)
            if pts.ndim != 2 or pts.shape[0] == 0:
                raise DomainError(f"{name} must be a nonempty (k, dim) array")
            arrays[name] = pts
        for name in ('source_masses', 'target_masses'):
            arrays[name] = np.array(getattr(self, name), dtype=float).reshape(-1)

        if arrays['source_points'].shape[0] != arrays['source_masses'].shape[0]:
            raise DimensionMismatchError("Every source needs exactly one mass")
        if arrays['target_points'].shape[0] != arrays['target_masses'].shape[0]:
            raise DimensionMismatchError("Every target needs exactly one mass")
        if arrays['source_points'].shape[1] != arrays['target_points'].shape[1]:
            raise DimensionMismatchError("Sources and targets live in different dimensions")
        if arrays['source_points'].shape[1] != self.sigma.dim:
            raise DimensionMismatchError(f"Atoms are {arrays['source_points'].shape[1]}-dimensional "
                                         f"but the anisotropy is {self.sigma.dim}-dimensional")
        for name, values in arrays.items():
            if not np.all(np.isfinite(values)):
                raise DomainError(f"{name} must be finite")
        for name in ('source_masses', 'target_masses'):
            if np.any(arrays[name] <= 0):
                raise DomainError(f"{name} must be positive")

        out_mass = float(np.sum(arrays['source_masses']))
        in_mass = float(np.sum(arrays['target_masses']))
        if abs(out_mass - in_mass) > BALANCE_TOL * max(1.0, out_mass):
            raise UnbalancedProblemError(f"Source mass {out_mass!r} differs from target mass {in_mass!r}")

        for name, values in arrays.items():
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    @classmethod
    def from_atoms(cls, sources: Sequence[Tuple[Sequence[float], float]],
                   targets: Sequence[Tuple[Sequence[float], float]],
                   H: BranchingFunction, sigma: Anisotropy, label: str = "") -> 'TransportProblem':
        return cls(np.array([p for p, _ in sources], dtype=float), np.array([m for _, m in sources], dtype=float),
                   np.array([p for p, _ in targets], dtype=float), np.array([m for _, m in targets], dtype=float),
                   H, sigma, label)

    @property
    def dim(self) -> int:
        return self.source_points.shape[1]

    @property
    def n_sources(self) -> int:
        return self.source_points.shape[0]

    @property
    def n_terminals(self) -> int:
        return self.source_points.shape[0] + self.target_points.shape[0]

    @property
    def terminal_points(self) -> np.ndarray:
        return np.concatenate([self.source_points, self.target_points])

    @property
    def demands(self) -> np.ndarray:
        """Net inflow required at each terminal: -mass at sources, +mass at targets."""
        return np.concatenate([-self.source_masses, self.target_masses])

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.target_masses))

    def mu_minus(self) -> ZeroCurrent:
        return ZeroCurrent(self.source_points, self.source_masses)

    def mu_plus(self) -> ZeroCurrent:
        return ZeroCurrent(self.target_points, self.target_masses)

    def required_boundary(self) -> ZeroCurrent:
        return self.mu_plus() - self.mu_minus()

    def scaled(self, t: float) -> 'TransportProblem':
        if t <= 0:
            raise DomainError(f"Scale factor must be positive, got {t}")
        return TransportProblem(t * self.source_points, self.source_masses, t * self.target_points,
                                self.target_masses, self.H, self.sigma, self.label)

    def rotated(self, angle: float) -> 'TransportProblem':
        """Rotate atoms and the unit ball of the anisotropy together (planar)."""
        R = rotation_matrix(angle)
        return TransportProblem(self.source_points @ R.T, self.source_masses, self.target_points @ R.T,
                                self.target_masses, self.H, self.sigma.rotated(angle), self.label)

    def with_branching(self, H: BranchingFunction) -> 'TransportProblem':
        return TransportProblem(self.source_points, self.source_masses, self.target_points,
                                self.target_masses, H, self.sigma, self.label)


@dataclass(frozen=True)
class NetworkDiagnostics:
    mass_bound_C: float
    mass: float
    max_multiplicity: float
    linf_bound_ok: bool
    acyclic: bool

    def to_json(self) -> Dict:
        return {
            'mass_bound_C': self.mass_bound_C,
            'mass': self.mass,
            'max_multiplicity': self.max_multiplicity,
            'linf_bound_ok': self.linf_bound_ok,
            'acyclic': self.acyclic,
        }


@dataclass(frozen=True, eq=False)
class Network:
    """
    A feasible competitor: the canonical acyclic current, its H-mass and the reduced
    topology it came from (collapsed Steiner points merged into their neighbors).
    """

    current: PolyhedralOneCurrent
    cost: float
    topology: Optional[Topology]
    steiner_positions: np.ndarray
    diagnostics: NetworkDiagnostics

    @property
    def n_branch_points(self) -> int:
        return 0 if self.topology is None else self.topology.n_steiner

    def to_json(self) -> Dict:
        return {
            'cost': self.cost,
            'edges': [{'a': list(a), 'b': list(b), 'theta': t} for a, b, t in self.current.edges()],
            'steiner_positions': np.asarray(self.steiner_positions).tolist(),
            'topology': None if self.topology is None else self.topology.to_json(),
            'diagnostics': self.diagnostics.to_json(),
        }


@dataclass(frozen=True)
class SolveBudget:
    """
    Search budget.

    Attributes:
        mode: 'exhaustive' or 'local'
        max_steiner: Steiner node cap (None: terminals - 2)
        seeds: Local-search restarts
        iters: Iteration cap of the position optimizer
        max_evaluations: Topology evaluations allowed per local-search restart
        max_topologies: Exhaustive-mode cap on evaluated topologies (None: all)
    """

    mode: str = 'exhaustive'
    max_steiner: Optional[int] = None
    seeds: int = 3
    iters: int = 2000
    max_evaluations: int = 500
    max_topologies: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ('exhaustive', 'local'):
            raise DomainError(f"Unknown solve mode '{self.mode}'")
        if self.seeds < 1 or self.iters < 1 or self.max_evaluations < 1:
            raise DomainError("Budget counts must be positive")


@dataclass(frozen=True)
class SolveResult:
    best: Network
    ties: List[Network] = field(default_factory=list)
    n_topologies: int = 0
    budget_exhausted: bool = False
    mode: str = 'exhaustive'


@dataclass(frozen=True)
class PositionResult:
    positions: np.ndarray
    cost: float
    collapsed: Tuple[Tuple[int, int], ...]
    iterations: int
    method: str


# ----------------------------------------
# Validation
# ----------------------------------------

@functools.lru_cache(maxsize=64)
def _is_convex(sigma: Anisotropy) -> bool:
    return check_convexity(sigma).convex


def require_convex(sigma: Anisotropy) -> None:
    if not _is_convex(sigma):
        raise NonConvexAnisotropyError(f"Anisotropy '{sigma.label}' does not induce a norm; "
                                       "position optimization needs a convex cost")


def check_problem(problem: TransportProblem, axiom_tol: float = AXIOM_TOL) -> None:
    """
    Reject problems the solver cannot price: non-monotone H or non-convex sigma.
    Linear H and H without blow-up at 0+ are accepted with a warning. `axiom_tol` is
    the absolute slack of the branching-axiom checks.
    """
    report = check_branching_axioms(problem.H, tol=axiom_tol)
    if not report.monotone_ok:
        raise DomainError(f"Branching function {problem.H.describe()} is not monotone")
    if problem.H.is_linear:
        logger.warning("Linear branching function: the problem is classical transport and no branching is rewarded")
    elif not report.derivative_blowup_ok:
        logger.warning(f"Branching function {problem.H.describe()} fails the blow-up check at 0+")
    require_convex(problem.sigma)


# ----------------------------------------
# Network assembly
# ----------------------------------------

def _diagnostics(current: PolyhedralOneCurrent, problem: TransportProblem) -> NetworkDiagnostics:
    theta_max = max_multiplicity(current)
    return NetworkDiagnostics(
        mass_bound_C=mass_bound_constant(problem.H, problem.sigma, problem.total_mass),
        mass=mass(current),
        max_multiplicity=theta_max,
        linf_bound_ok=theta_max <= problem.total_mass * (1 + 1e-12),
        acyclic=is_acyclic(current),
    )


def _reduce_topology(topology: Topology, X: np.ndarray) -> Tuple[Topology, np.ndarray]:
    """Merge every Steiner node lying on a neighbor into that neighbor."""
    T = topology.n_terminals
    G = topology.graph()
    changed = True
    while changed:
        changed = False
        for u, v in sorted(G.edges):
            steiner = [n for n in (u, v) if n >= T]
            if steiner and np.linalg.norm(X[u] - X[v]) <= GEOM_TOL:
                drop = max(steiner)
                keep = v if drop == u else u
                G = nx.contracted_nodes(G, keep, drop, self_loops=False)
                changed = True
                break
    steiner = sorted(n for n in G.nodes if n >= T)
    mapping = {old: T + i for i, old in enumerate(steiner)}
    edges = tuple((mapping.get(u, u), mapping.get(v, v)) for u, v in G.edges)
    positions = X[steiner] if steiner else np.zeros((0, X.shape[1]))
    return Topology(T, len(steiner), edges), positions


def assemble_network(problem: TransportProblem, topology: Topology, steiner_positions: np.ndarray) -> Network:
    """
    Build the network of a topology at given Steiner positions: zero-length and
    zero-flow edges are dropped, the current is canonicalized and cleared of cycles.
    """
    X = np.vstack([problem.terminal_points, np.asarray(steiner_positions, dtype=float).reshape(-1, problem.dim)])
    flows = topology.flows(problem.demands)
    edges = [(X[u], X[v], f) for (u, v), f in flows.items()
             if abs(f) > ZERO_WEIGHT_TOL and np.linalg.norm(X[v] - X[u]) > GEOM_TOL]
    current = remove_cycles(PolyhedralOneCurrent.from_edges(edges, problem.dim), problem.H, problem.sigma)
    reduced, positions = _reduce_topology(topology, X)
    return Network(current=current, cost=h_mass(current, problem.H, problem.sigma), topology=reduced,
                   steiner_positions=positions, diagnostics=_diagnostics(current, problem))


def initial_feasible(problem: TransportProblem) -> Network:
    """
    Direct matching by the north-west-corner rule on atoms sorted lexicographically.

    Masses are matched in exact rational arithmetic of their float values, so conservation
    holds at every atom up to the final float conversion.
    """
    src_order = sorted(range(problem.n_sources), key=lambda i: (tuple(problem.source_points[i]), i))
    tgt_order = sorted(range(len(problem.target_masses)), key=lambda j: (tuple(problem.target_points[j]), j))
    src_left = {i: Fraction(float(problem.source_masses[i])) for i in src_order}
    tgt_left = {j: Fraction(float(problem.target_masses[j])) for j in tgt_order}

    matches: List[Tuple[int, int, Fraction]] = []
    si = ti = 0
    while si < len(src_order) and ti < len(tgt_order):
        i, j = src_order[si], tgt_order[ti]
        amount = min(src_left[i], tgt_left[j])
        if amount > 0:
            matches.append((i, j, amount))
        src_left[i] -= amount
        tgt_left[j] -= amount
        if src_left[i] == 0:
            si += 1
        if tgt_left[j] == 0:
            ti += 1

    edges = [(problem.source_points[i], problem.target_points[j], float(m)) for i, j, m in matches
             if np.linalg.norm(problem.target_points[j] - problem.source_points[i]) > GEOM_TOL]
    current = remove_cycles(PolyhedralOneCurrent.from_edges(edges, problem.dim), problem.H, problem.sigma)
    topology = topology_from_pairs(problem.n_terminals, [(i, problem.n_sources + j) for i, j, _ in matches])
    logger.debug(f"North-west-corner matching uses {len(matches)} segments")
    return Network(current=current, cost=h_mass(current, problem.H, problem.sigma), topology=topology,
                   steiner_positions=np.zeros((0, problem.dim)), diagnostics=_diagnostics(current, problem))


# ----------------------------------------
# Position optimization
# ----------------------------------------

class _Objective:
    """sum_e H(|theta_e|) G_sigma(x_v - x_u) over the positive-flow edges of a topology."""

    def __init__(self, topology: Topology, problem: TransportProblem):
        self.topology = topology
        self.problem = problem
        self.terminals = problem.terminal_points
        flows = topology.flows(problem.demands)
        kept = [(u, v, f) for (u, v), f in flows.items() if abs(f) > ZERO_WEIGHT_TOL]
        self.U = np.array([u for u, _, _ in kept], dtype=int)
        self.V = np.array([v for _, v, _ in kept], dtype=int)
        self.weights = problem.H.evaluate(np.array([abs(f) for _, _, f in kept], dtype=float)) if kept else np.zeros(0)

    def points(self, steiner: np.ndarray) -> np.ndarray:
        return np.vstack([self.terminals, steiner.reshape(-1, self.terminals.shape[1])])

    def cost(self, steiner: np.ndarray) -> float:
        if self.U.size == 0:
            return 0.0
        X = self.points(steiner)
        return float(np.sum(self.weights * anisotropic_norms(self.problem.sigma, X[self.V] - X[self.U])))

    def initial_positions(self) -> np.ndarray:
        """Each Steiner node starts at the mean of all terminals weighted by 2^-(tree distance)."""
        G = self.topology.graph()
        T = self.topology.n_terminals
        out = np.zeros((self.topology.n_steiner, self.terminals.shape[1]))
        for k in range(self.topology.n_steiner):
            hops = nx.single_source_shortest_path_length(G, T + k)
            w = np.array([2.0 ** -hops[t] for t in range(T)])
            out[k] = w @ self.terminals / w.sum()
        return out


def _optimize_polygonal(obj: _Objective) -> Tuple[np.ndarray, int]:
    """Exact LP: min sum_e w_e t_e with <n_i, x_v - x_u> <= t_e for every support normal n_i."""
    T = obj.topology.n_terminals
    S = obj.topology.n_steiner
    normals = obj.problem.sigma.polygon.support_normals()
    n_edges = obj.U.size
    n_vars = 2 * S + n_edges

    rows, cols, vals, rhs = [], [], [], []
    r = 0
    for e in range(n_edges):
        u, v = int(obj.U[e]), int(obj.V[e])
        for n in normals:
            const = 0.0
            for node, sign in ((v, 1.0), (u, -1.0)):
                if node >= T:
                    k = node - T
                    rows += [r, r]
                    cols += [2 * k, 2 * k + 1]
                    vals += [sign * n[0], sign * n[1]]
                else:
                    const += sign * float(n @ obj.terminals[node])
            rows.append(r)
            cols.append(2 * S + e)
            vals.append(-1.0)
            rhs.append(-const)
            r += 1

    cost = np.concatenate([np.zeros(2 * S), obj.weights])
    A_ub = sparse.csr_matrix((vals, (rows, cols)), shape=(r, n_vars))
    bounds = [(None, None)] * (2 * S) + [(0, None)] * n_edges
    result = linprog(cost, A_ub=A_ub, b_ub=np.array(rhs), bounds=bounds, method='highs')
    if result.status != 0:
        raise NumericalDegeneracyError(f"Position LP failed: {result.message}")
    return result.x[:2 * S].reshape(S, 2), int(getattr(result, 'nit', 0))


def _optimize_weiszfeld(obj: _Objective, max_iters: int, tol: float) -> Tuple[np.ndarray, int]:
    """Gauss-Seidel generalized-median steps, one Steiner node at a time."""
    T = obj.topology.n_terminals
    X = obj.points(obj.initial_positions())
    incident: Dict[int, List[Tuple[int, float]]] = {s: [] for s in range(T, obj.topology.n_nodes)}
    for u, v, w in zip(obj.U, obj.V, obj.weights):
        for a, b in ((int(u), int(v)), (int(v), int(u))):
            if a >= T:
                incident[a].append((b, float(w)))

    scale = max(1.0, float(np.max(np.ptp(obj.terminals, axis=0))))
    iterations = 0
    for iterations in range(1, max_iters + 1):
        moved = 0.0
        for s, nbrs in incident.items():
            if not nbrs:
                continue
            P = X[[b for b, _ in nbrs]]
            w = np.array([wt for _, wt in nbrs])
            d = np.maximum(np.linalg.norm(P - X[s], axis=1), 1e-15)
            coeff = w / d
            update = coeff @ P / coeff.sum()
            moved = max(moved, float(np.linalg.norm(update - X[s])))
            X[s] = update
        if moved <= tol * scale:
            break
    return X[T:].copy(), iterations


def _norm_gradient(sigma: Anisotropy, D: np.ndarray) -> np.ndarray:
    """Gradients of G_sigma at the rows of D by central differences; zero rows get 0."""
    out = np.zeros_like(D)
    lengths = np.linalg.norm(D, axis=1)
    nonzero = lengths > 0
    if not np.any(nonzero):
        return out
    Dn = D[nonzero]
    h = 1e-7 * np.maximum(1.0, lengths[nonzero])
    for k in range(D.shape[1]):
        step = np.zeros_like(Dn)
        step[:, k] = h
        out[nonzero, k] = (anisotropic_norms(sigma, Dn + step) - anisotropic_norms(sigma, Dn - step)) / (2 * h)
    return out


def _optimize_subgradient(obj: _Objective, max_iters: int, tol: float) -> Tuple[np.ndarray, int]:
    """Normalized subgradient steps c/sqrt(k) with step-weighted iterate averaging."""
    T = obj.topology.n_terminals
    spread = np.ptp(obj.terminals, axis=0)
    c = 0.1 * max(float(np.max(spread)), 1e-6)

    x = obj.initial_positions()
    best_x, best = x.copy(), obj.cost(x)
    avg, weight_sum = np.zeros_like(x), 0.0
    window_start = best
    iterations = 0
    for iterations in range(1, max_iters + 1):
        X = obj.points(x)
        grads = _norm_gradient(obj.problem.sigma, X[obj.V] - X[obj.U]) * obj.weights[:, None]
        g = np.zeros_like(X)
        np.add.at(g, obj.V, grads)
        np.add.at(g, obj.U, -grads)
        g = g[T:]
        norm = np.linalg.norm(g)
        if norm == 0:
            break
        step = c / np.sqrt(iterations)
        x = x - step * g / norm
        avg += step * x
        weight_sum += step

        value = obj.cost(x)
        if value < best:
            best, best_x = value, x.copy()
        if iterations % SUBGRADIENT_WINDOW == 0:
            mean = avg / weight_sum
            mean_cost = obj.cost(mean)
            if mean_cost < best:
                best, best_x = mean_cost, mean.copy()
            if window_start - best <= tol * max(1.0, best):
                break
            window_start = best
    return best_x, iterations


def _collapse(obj: _Objective, positions: np.ndarray, tol: float) -> Tuple[np.ndarray, float, List[Tuple[int, int]]]:
    """Snap Steiner points onto neighbors whenever that does not increase cost beyond tol."""
    T = obj.topology.n_terminals
    positions = positions.copy()
    cost = obj.cost(positions)
    collapsed: List[Tuple[int, int]] = []
    for k in range(obj.topology.n_steiner):
        node = T + k
        for nbr in obj.topology.neighbors(node):
            target = obj.terminals[nbr] if nbr < T else positions[nbr - T]
            trial = positions.copy()
            trial[k] = target
            value = obj.cost(trial)
            if value <= cost + tol * max(1.0, cost):
                positions, cost = trial, value
                collapsed.append((node, nbr))
                break
    return positions, cost, collapsed


def optimize_positions(topology: Topology, problem: TransportProblem, max_iters: int = 2000,
                       tol: float = OPTIMIZER_TOL) -> PositionResult:
    """
    Minimize the network cost over Steiner positions for fixed multiplicities.

    Polygonal gauges are solved exactly as a linear program, (scaled) Euclidean costs by
    Weiszfeld steps and any other convex anisotropy by averaged subgradient descent.
    Terminals never move. Afterwards every Steiner point that can be snapped onto a
    neighbor without raising the cost is snapped and reported in `collapsed`.

    Args:
        topology: Tree topology over the problem's terminals
        problem: Transport problem
        max_iters: Iteration cap for the iterative methods
        tol: Stopping tolerance on relative cost decrease

    Returns:
        PositionResult with positions of shape (n_steiner, dim)

    Raises:
        NonConvexAnisotropyError: If sigma is not convex
    """
    if topology.n_terminals != problem.n_terminals:
        raise DimensionMismatchError(f"Topology has {topology.n_terminals} terminals, "
                                     f"problem has {problem.n_terminals}")
    require_convex(problem.sigma)
    obj = _Objective(topology, problem)
    if topology.n_steiner == 0:
        empty = np.zeros((0, problem.dim))
        return PositionResult(empty, obj.cost(empty), (), 0, 'none')

    kind = problem.sigma.kind
    if kind == 'polygonal':
        positions, iterations = _optimize_polygonal(obj)
        method = 'lp'
    elif kind == 'constant':
        positions, iterations = _optimize_weiszfeld(obj, max_iters, tol)
        method = 'weiszfeld'
    else:
        positions, iterations = _optimize_subgradient(obj, max_iters, tol)
        method = 'subgradient'

    positions, cost, collapsed = _collapse(obj, positions, tol)
    return PositionResult(positions, cost, tuple(collapsed), iterations, method)


# ----------------------------------------
# Search
# ----------------------------------------

@dataclass(frozen=True)
class _Evaluation:
    topology: Topology
    encoding: tuple
    result: PositionResult

    @property
    def key(self) -> Tuple[float, tuple]:
        return (self.result.cost, self.encoding)


def _evaluate(problem: TransportProblem, max_iters: int, tol: float, topology: Topology) -> _Evaluation:
    return _Evaluation(topology, topology.encoding(), optimize_positions(topology, problem, max_iters, tol))


def _select(evaluations: Sequence[_Evaluation]) -> Tuple[_Evaluation, List[_Evaluation]]:
    best = min(evaluations, key=lambda e: e.key)
    limit = best.result.cost + TIE_TOL * max(1.0, abs(best.result.cost))
    ties = sorted((e for e in evaluations if e.result.cost <= limit), key=lambda e: e.encoding)
    return best, ties


def _current_key(current: PolyhedralOneCurrent, digits: int = 9) -> tuple:
    """Geometry of a canonical current rounded for duplicate detection."""
    return tuple((tuple(np.round(a, digits)), tuple(np.round(b, digits)), round(t, digits))
                 for a, b, t in current.edges())


def _to_network(problem: TransportProblem, evaluation: _Evaluation) -> Network:
    return assemble_network(problem, evaluation.topology, evaluation.result.positions)


def _solve_exhaustive(problem: TransportProblem, budget: SolveBudget, tol: float,
                      threads: int) -> SolveResult:
    topologies = enumerate_topologies(problem.n_terminals, budget.max_steiner)
    exhausted = False
    if budget.max_topologies is not None and len(topologies) > budget.max_topologies:
        logger.warning(f"Evaluating {budget.max_topologies} of {len(topologies)} topologies within budget")
        topologies = topologies[:budget.max_topologies]
        exhausted = True

    executor = ParallelExecutor(num_workers=threads, phase_name="Topology evaluation")
    evaluations = executor.map_ordered(functools.partial(_evaluate, problem, budget.iters, tol), topologies)
    best, ties = _select(evaluations)

    best_net = _to_network(problem, best)
    networks: List[Network] = []
    seen = set()
    for e in ([best] + [t for t in ties if t is not best]):
        net = best_net if e is best else _to_network(problem, e)
        key = _current_key(net.current)
        if key not in seen:
            seen.add(key)
            networks.append(net)
    logger.info(f"Exhaustive search over {len(topologies)} topologies: best cost {best.result.cost:.10g}, "
                f"{len(networks)} tied network(s)")
    return SolveResult(best=best_net, ties=networks, n_topologies=len(topologies), budget_exhausted=exhausted,
                       mode='exhaustive')


def _solve_local(problem: TransportProblem, budget: SolveBudget, seed: int, tol: float) -> SolveResult:
    rng = np.random.default_rng(seed)
    T = problem.n_terminals
    max_steiner = max(0, T - 2) if budget.max_steiner is None else max(0, min(budget.max_steiner, T - 2))
    cache: Dict[tuple, _Evaluation] = {}
    exhausted = False

    def evaluate(topology: Topology) -> _Evaluation:
        key = topology.encoding()
        if key not in cache:
            cache[key] = _evaluate(problem, budget.iters, tol, topology)
        return cache[key]

    starts = [initial_feasible(problem).topology]
    if max_steiner >= 1 and T >= 3:
        starts.append(star_topology(T))

    best: Optional[_Evaluation] = None
    for restart in range(budget.seeds):
        start = starts[restart] if restart < len(starts) else random_topology(T, max_steiner, rng)
        current = evaluate(start)
        evaluations = 1
        improved = True
        while improved:
            improved = False
            nodes = np.concatenate([problem.terminal_points, current.result.positions])
            moves = neighbor_topologies(current.topology, max_steiner, current.result.collapsed, positions=nodes)
            # parallel-edge merges first, the other moves in random order
            n_merge = sum(1 for name, _ in moves if name == 'merge_parallel')
            order = list(range(n_merge)) + [n_merge + int(i) for i in rng.permutation(len(moves) - n_merge)]
            for idx in order:
                if evaluations >= budget.max_evaluations:
                    exhausted = True
                    break
                candidate = evaluate(moves[int(idx)][1])
                evaluations += 1
                if candidate.result.cost < current.result.cost - tol * max(1.0, current.result.cost):
                    logger.debug(f"Restart {restart}: {moves[int(idx)][0]} lowers cost to {candidate.result.cost:.10g}")
                    current = candidate
                    improved = True
                    break
        if best is None or current.key < best.key:
            best = current

    if exhausted:
        logger.warning(f"Local search hit its evaluation budget of {budget.max_evaluations}; returning best so far")
    logger.info(f"Local search evaluated {len(cache)} topologies: best cost {best.result.cost:.10g}")
    return SolveResult(best=_to_network(problem, best), ties=[], n_topologies=len(cache), budget_exhausted=exhausted,
                       mode='local')


def solve(problem: TransportProblem, budget: Optional[SolveBudget] = None, seed: int = 0,
          tol: float = OPTIMIZER_TOL, threads: int = 1, axiom_tol: float = AXIOM_TOL) -> SolveResult:
    """
    Search for a low-cost acyclic network with boundary mu+ - mu-.

    Exhaustive mode evaluates every tree topology with at most max_steiner Steiner nodes
    (six terminals at most) and returns all networks tied with the best. Local mode starts
    from the direct matching, a star and seeded random trees, and applies first-improvement
    moves; running out of evaluations returns the best so far with `budget_exhausted` set.
    The problem is first screened by check_problem with `axiom_tol`.

    Raises:
        NonConvexAnisotropyError: If sigma is not convex
        SizeLimitError: If exhaustive mode gets more than six terminals
    """
    budget = budget or SolveBudget()
    check_problem(problem, axiom_tol)
    if budget.mode == 'exhaustive':
        return _solve_exhaustive(problem, budget, tol, threads)
    return _solve_local(problem, budget, seed, tol)


# ----------------------------------------
# Oracle and verification
# ----------------------------------------

def brute_force_oracle(problem: TransportProblem, grid: Sequence[Sequence[float]]) -> Network:
    """
    Exact optimum over tree topologies with at most two Steiner nodes whose positions
    are restricted to `grid`. Ties go to the first topology in encoding order, then to
    the first grid assignment in lexicographic index order.

    Raises:
        SizeLimitError: Over four terminals or a hundred grid points
    """
    G = np.atleast_2d(np.asarray(grid, dtype=float))
    if problem.n_terminals > MAX_ORACLE_TERMINALS:
        raise SizeLimitError(f"Oracle supports at most {MAX_ORACLE_TERMINALS} terminals, got {problem.n_terminals}")
    if G.shape[0] > MAX_ORACLE_GRID:
        raise SizeLimitError(f"Oracle grid is limited to {MAX_ORACLE_GRID} points, got {G.shape[0]}")
    if G.shape[1] != problem.dim:
        raise DimensionMismatchError("Grid points must match the problem dimension")

    best: Optional[Tuple[float, Topology, np.ndarray]] = None
    for topology in enumerate_topologies(problem.n_terminals, MAX_ORACLE_STEINER):
        obj = _Objective(topology, problem)
        S = topology.n_steiner
        if S == 0:
            cost, positions = obj.cost(np.zeros((0, problem.dim))), np.zeros((0, problem.dim))
        else:
            idx = np.indices((G.shape[0],) * S).reshape(S, -1).T
            costs = np.zeros(idx.shape[0])
            T = topology.n_terminals
            for u, v, w in zip(obj.U, obj.V, obj.weights):
                Xu = G[idx[:, u - T]] if u >= T else np.broadcast_to(obj.terminals[u], (idx.shape[0], problem.dim))
                Xv = G[idx[:, v - T]] if v >= T else np.broadcast_to(obj.terminals[v], (idx.shape[0], problem.dim))
                costs += w * anisotropic_norms(problem.sigma, Xv - Xu)
            k = int(np.argmin(costs))
            cost, positions = float(costs[k]), G[idx[k]]
        if best is None or cost < best[0] - 1e-12 * max(1.0, abs(best[0])):
            best = (cost, topology, positions)

    return assemble_network(problem, best[1], best[2])


@dataclass(frozen=True)
class NetworkVerification:
    boundary_ok: bool
    boundary_diff: List[Tuple[Tuple[float, ...], float]]
    acyclic: bool
    linf_ok: bool
    max_multiplicity: float
    linf_bound: float
    mass_bound_ok: bool
    mass: float
    mass_bound: float
    cost_ok: bool
    cost_recomputed: float
    cost_gap: float

    @property
    def all_ok(self) -> bool:
        return self.boundary_ok and self.acyclic and self.linf_ok and self.mass_bound_ok and self.cost_ok

    def to_json(self) -> Dict:
        return {
            'all_ok': self.all_ok,
            'boundary_ok': self.boundary_ok,
            'boundary_diff': [{'p': list(p), 'w': w} for p, w in self.boundary_diff],
            'acyclic': self.acyclic,
            'linf_ok': self.linf_ok,
            'max_multiplicity': self.max_multiplicity,
            'linf_bound': self.linf_bound,
            'mass_bound_ok': self.mass_bound_ok,
            'mass': self.mass,
            'mass_bound': self.mass_bound,
            'cost_ok': self.cost_ok,
            'cost_recomputed': self.cost_recomputed,
            'cost_gap': self.cost_gap,
        }


def verify_network(net: Network, problem: TransportProblem, tol: float = 1e-9) -> NetworkVerification:
    """Check a network against the problem; failures are reported, never raised."""
    diff = boundary(net.current) - problem.required_boundary()
    scale = max(1.0, problem.total_mass)
    bad = [(p, w) for p, w in diff.atoms() if abs(w) > tol * scale]

    recomputed = h_mass(net.current, problem.H, problem.sigma)
    C = mass_bound_constant(problem.H, problem.sigma, problem.total_mass)
    M = mass(net.current)
    theta_max = max_multiplicity(net.current)
    return NetworkVerification(
        boundary_ok=not bad,
        boundary_diff=bad,
        acyclic=is_acyclic(net.current),
        linf_ok=theta_max <= problem.total_mass + tol * scale,
        max_multiplicity=theta_max,
        linf_bound=problem.total_mass,
        mass_bound_ok=M <= C * recomputed + tol * max(1.0, M),
        mass=M,
        mass_bound=C * recomputed,
        cost_ok=abs(recomputed - net.cost) <= tol * max(1.0, recomputed),
        cost_recomputed=recomputed,
        cost_gap=recomputed - net.cost,
    )
