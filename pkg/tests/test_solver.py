# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

import dataclasses
import logging
import math
import threading

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from src.abot_lib.anisotropy import Anisotropy, BranchingFunction
from src.abot_lib.currents import PolyhedralOneCurrent, boundary, h_mass, is_acyclic
from src.abot_lib.errors import (DimensionMismatchError, DomainError, NonConvexAnisotropyError, SizeLimitError,
                                 UnbalancedProblemError)
from src.abot_lib.experiments import y_instance
from src.abot_lib.solver import (SolveBudget, TransportProblem, brute_force_oracle, initial_feasible,
                                 optimize_positions, solve, verify_network)
from src.abot_lib.topology import path_topology, star_topology

SQRT = BranchingFunction.power(0.5)
EXHAUSTIVE = SolveBudget(mode='exhaustive')


def edge_key(current):
    return {(a, b, round(t, 9)) for a, b, t in current.edges()}


def four_corner_problem(sigma=None):
    """Two sources on the left, two targets on the right."""
    return TransportProblem.from_atoms([((0.0, 0.0), 1.0), ((0.0, 1.0), 1.0)],
                                       [((3.0, 0.0), 1.0), ((3.0, 1.0), 1.0)],
                                       SQRT, sigma or Anisotropy.euclidean())


def crossed_square_problem():
    """Sources and targets on alternate corners of the unit square: two optimal matchings."""
    return TransportProblem.from_atoms([((0.0, 0.0), 1.0), ((1.0, 1.0), 1.0)],
                                       [((1.0, 0.0), 1.0), ((0.0, 1.0), 1.0)],
                                       SQRT, Anisotropy.euclidean())


# ----------------------------------------
# Problems
# ----------------------------------------

def test_problem_validation():
    with pytest.raises(UnbalancedProblemError) as exc:
        TransportProblem.from_atoms([((0.0, 0.0), 1.0)], [((1.0, 0.0), 2.0)], SQRT, Anisotropy.euclidean())
    assert exc.value.exit_code == 3
    with pytest.raises(DomainError):
        TransportProblem.from_atoms([((0.0, 0.0), -1.0)], [((1.0, 0.0), -1.0)], SQRT, Anisotropy.euclidean())
    with pytest.raises(DimensionMismatchError):
        TransportProblem.from_atoms([((0.0, 0.0), 1.0)], [((1.0, 0.0), 1.0)], SQRT, Anisotropy.euclidean(3))


def test_problem_views():
    problem = y_instance(2.0)
    assert problem.n_terminals == 3
    assert problem.total_mass == 2.0
    assert list(problem.demands) == [-1.0, -1.0, 2.0]
    assert problem.required_boundary().mass == pytest.approx(4.0)


@pytest.mark.parametrize("mode", ['bogus', 'greedy'])
def test_budget_mode(mode):
    with pytest.raises(DomainError):
        SolveBudget(mode=mode)


# ----------------------------------------
# Initial matching
# ----------------------------------------

def test_initial_feasible_matches_in_order():
    problem = TransportProblem.from_atoms([((0.0, 0.0), 1.0), ((0.0, 1.0), 2.0)],
                                          [((2.0, 0.0), 1.5), ((2.0, 1.0), 1.5)],
                                          SQRT, Anisotropy.euclidean())
    net = initial_feasible(problem)
    assert verify_network(net, problem).all_ok
    assert net.n_branch_points == 0
    thetas = sorted(abs(t) for _, _, t in net.current.edges())
    assert thetas == pytest.approx([0.5, 1.0, 1.5])


# ----------------------------------------
# Position optimization
# ----------------------------------------

def test_weiszfeld_places_y_junction():
    problem = y_instance(2.0)
    result = optimize_positions(star_topology(3), problem)
    assert result.method == 'weiszfeld'
    assert result.positions[0] == pytest.approx([0.0, 1.0], abs=1e-4)
    assert result.cost == pytest.approx(3 * math.sqrt(2), abs=1e-6)
    assert result.collapsed == ()


def test_linear_program_places_l1_junction():
    problem = y_instance(2.0, sigma=Anisotropy.lp(1))
    result = optimize_positions(star_topology(3), problem)
    assert result.method == 'lp'
    assert result.positions[0] == pytest.approx([0.0, 0.0], abs=1e-9)
    assert result.cost == pytest.approx(2 + 2 * math.sqrt(2), abs=1e-9)


def test_low_target_collapses_the_junction():
    result = optimize_positions(star_topology(3), y_instance(0.5))
    assert result.collapsed == ((3, 2),)
    assert result.positions[0] == pytest.approx([0.0, 0.5])


def test_no_steiner_nodes():
    result = optimize_positions(path_topology(3), y_instance(2.0))
    assert result.method == 'none'
    assert result.positions.shape == (0, 2)


def test_subgradient_on_smooth_anisotropy():
    sigma = Anisotropy.fourier(1.0, cos=[0.0, 0.1])
    problem = y_instance(2.0, sigma=sigma)
    result = optimize_positions(star_topology(3), problem)
    assert result.method == 'subgradient'

    def leg(s):
        return math.hypot(1.0, s) * (1 + 0.1 * (1 - s * s) / (1 + s * s))

    reference = minimize_scalar(lambda s: 2 * leg(s) + math.sqrt(2) * 0.9 * (2 - s), bounds=(0.0, 2.0),
                                method='bounded', options={'xatol': 1e-10})
    assert result.cost == pytest.approx(reference.fun, abs=1e-3)


def test_non_convex_anisotropy_is_rejected():
    root = Anisotropy.from_norm(lambda U: (np.sqrt(np.abs(U[:, 0])) + np.sqrt(np.abs(U[:, 1]))) ** 2, 2)
    problem = y_instance(2.0, sigma=root)
    with pytest.raises(NonConvexAnisotropyError):
        optimize_positions(star_topology(3), problem)
    with pytest.raises(NonConvexAnisotropyError):
        solve(problem)


# ----------------------------------------
# Search
# ----------------------------------------

def test_single_pair():
    problem = TransportProblem.from_atoms([((0.0, 0.0), 1.0)], [((3.0, 4.0), 1.0)], SQRT, Anisotropy.euclidean())
    result = solve(problem)
    assert result.best.cost == pytest.approx(5.0)
    assert result.best.n_branch_points == 0
    assert solve(dataclasses.replace(problem, sigma=Anisotropy.lp(1))).best.cost == pytest.approx(7.0)


def test_y_instance_branches():
    result = solve(y_instance(2.0), EXHAUSTIVE)
    best = result.best
    assert result.n_topologies == 4
    assert best.n_branch_points == 1
    assert best.steiner_positions[0] == pytest.approx([0.0, 1.0], abs=1e-4)
    assert best.cost == pytest.approx(3 * math.sqrt(2), abs=1e-6)
    assert verify_network(best, y_instance(2.0)).all_ok


def test_l1_y_instance():
    result = solve(y_instance(2.0, sigma=Anisotropy.lp(1)))
    assert result.best.cost == pytest.approx(2 + 2 * math.sqrt(2), abs=1e-9)
    assert result.best.steiner_positions[0] == pytest.approx([0.0, 0.0], abs=1e-9)


def test_low_target_does_not_branch():
    result = solve(y_instance(0.5))
    assert result.best.n_branch_points == 0
    assert result.best.cost == pytest.approx(2 * math.hypot(1.0, 0.5))


def test_ties_report_both_matchings():
    problem = crossed_square_problem()
    result = solve(problem)
    assert result.best.cost == pytest.approx(2.0)
    keys = [edge_key(net.current) for net in result.ties]
    first = {((0.0, 0.0), (1.0, 0.0), 1.0), ((0.0, 1.0), (1.0, 1.0), -1.0)}
    second = {((0.0, 0.0), (0.0, 1.0), 1.0), ((1.0, 0.0), (1.0, 1.0), -1.0)}
    assert first in keys
    assert second in keys
    assert len(keys) == len({tuple(sorted(k)) for k in keys})
    for net in result.ties:
        assert net.cost == pytest.approx(2.0, abs=1e-8)


def test_solve_is_deterministic():
    problem = four_corner_problem()
    one = solve(problem, threads=1)
    four = solve(problem, threads=4)
    assert one.best.to_json() == four.best.to_json()
    assert [n.to_json() for n in one.ties] == [n.to_json() for n in four.ties]


def test_repeated_threaded_solves_release_workers():
    before = threading.active_count()
    for _ in range(5):
        solve(y_instance(2.0), threads=4)
    assert threading.active_count() == before


def test_local_search_is_close_to_exhaustive():
    problem = four_corner_problem()
    exhaustive = solve(problem, EXHAUSTIVE)
    local = solve(problem, SolveBudget(mode='local', seeds=3), seed=11)
    assert local.best.cost <= 1.05 * exhaustive.best.cost
    assert verify_network(local.best, problem).all_ok
    assert local.mode == 'local'
    assert local.ties == []


def test_local_search_budget(caplog):
    result = solve(four_corner_problem(), SolveBudget(mode='local', seeds=1, max_evaluations=2))
    assert result.budget_exhausted
    assert verify_network(result.best, four_corner_problem()).boundary_ok
    assert "evaluation budget" in caplog.text


def test_local_search_merges_parallel_edges(caplog):
    # the two direct edges leave the target 0.33 rad apart
    caplog.set_level(logging.DEBUG, logger='src.abot_lib.solver')
    problem = y_instance(6.0)
    local = solve(problem, SolveBudget(mode='local', seeds=1))
    assert "merge_parallel lowers cost" in caplog.text
    assert local.best.n_branch_points == 1
    assert local.best.cost == pytest.approx(solve(problem, EXHAUSTIVE).best.cost, rel=1e-6)


def test_exhaustive_topology_cap():
    result = solve(four_corner_problem(), SolveBudget(max_topologies=5))
    assert result.budget_exhausted
    assert result.n_topologies == 5


def test_exhaustive_size_limit():
    sources = [((float(i), 0.0), 1.0) for i in range(4)]
    targets = [((float(i), 2.0), 1.0) for i in range(3)] + [((5.0, 2.0), 1.0)]
    problem = TransportProblem.from_atoms(sources, targets, SQRT, Anisotropy.euclidean())
    with pytest.raises(SizeLimitError):
        solve(problem, EXHAUSTIVE)


# ----------------------------------------
# Structural properties
# ----------------------------------------

def test_scaling_multiplies_cost():
    problem = y_instance(2.0)
    assert solve(problem.scaled(3.0)).best.cost == pytest.approx(3 * solve(problem).best.cost, rel=1e-7)


def test_rotation_keeps_cost():
    problem = y_instance(2.0, sigma=Anisotropy.lp(1))
    assert solve(problem.rotated(0.3)).best.cost == pytest.approx(solve(problem).best.cost, abs=1e-8)


def test_cost_is_monotone_in_branching_function():
    problem = four_corner_problem()
    cheap = solve(problem).best.cost
    dear = solve(problem.with_branching(BranchingFunction.affine_jump(0.5, 1.0))).best.cost
    assert cheap <= dear + 1e-9


def test_branching_function_checks(caplog):
    linear = y_instance(2.0, H=BranchingFunction.power(1.0))
    result = solve(linear)
    assert "Linear branching function" in caplog.text
    assert result.best.cost == pytest.approx(2 * math.sqrt(5))
    with pytest.raises(DomainError):
        solve(y_instance(2.0, H=BranchingFunction.tabulated([(1.0, 1.0), (2.0, 0.5)])))


def test_axiom_tolerance_reaches_the_monotonicity_check():
    # drops by 1e-10 between the two knots
    H = BranchingFunction.tabulated([(1.0, 1.0), (2.0, 1.0 - 1e-10)])
    with pytest.raises(DomainError):
        solve(y_instance(2.0, H=H))
    result = solve(y_instance(2.0, H=H), axiom_tol=1e-9)
    assert verify_network(result.best, y_instance(2.0, H=H)).boundary_ok


# ----------------------------------------
# Oracle and verification
# ----------------------------------------

def test_oracle_on_grid():
    problem = y_instance(2.0)
    grid = [(x, y) for x in np.linspace(-1, 1, 5) for y in np.linspace(0, 2, 5)]
    oracle = brute_force_oracle(problem, grid)
    assert oracle.cost == pytest.approx(3 * math.sqrt(2))
    assert solve(problem).best.cost <= oracle.cost + 1e-6


def random_problem(seed):
    """Three or four terminals in the unit square; even seeds Euclidean, odd seeds l1."""
    rng = np.random.default_rng(seed)
    n_terminals = int(rng.integers(3, 5))
    n_sources = int(rng.integers(1, n_terminals))
    points = rng.uniform(0, 1, size=(n_terminals, 2))
    source_mass = rng.uniform(0.5, 2.0, size=n_sources)
    target_mass = source_mass.sum() * rng.dirichlet(np.ones(n_terminals - n_sources))
    sigma = Anisotropy.euclidean() if seed % 2 == 0 else Anisotropy.lp(1)
    return TransportProblem.from_atoms(list(zip(points[:n_sources], source_mass)),
                                       list(zip(points[n_sources:], target_mass)), SQRT, sigma,
                                       label=f"random_{seed}")


UNIT_GRID = [(x, y) for x in np.linspace(0, 1, 5) for y in np.linspace(0, 1, 5)]


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_random_corpus_against_oracle(seed):
    problem = random_problem(seed)
    exhaustive = solve(problem, EXHAUSTIVE).best
    oracle = brute_force_oracle(problem, UNIT_GRID)
    assert exhaustive.cost <= oracle.cost + 1e-6 * max(1.0, oracle.cost)
    local = solve(problem, SolveBudget(mode='local', seeds=3), seed=seed).best
    assert local.cost <= 1.05 * exhaustive.cost


@pytest.mark.parametrize("seed", range(20))
def test_random_corpus_multiplicity_and_mass_bounds(seed):
    problem = random_problem(seed)
    net = solve(problem, EXHAUSTIVE).best
    report = verify_network(net, problem)
    assert report.all_ok
    assert report.linf_ok and report.max_multiplicity <= problem.total_mass + 1e-9
    assert report.mass_bound_ok and report.mass <= report.mass_bound + 1e-9 * max(1.0, report.mass)


def test_oracle_limits():
    with pytest.raises(SizeLimitError):
        brute_force_oracle(y_instance(2.0), [(0.0, float(i)) for i in range(101)])
    sources = [((float(i), 0.0), 1.0) for i in range(3)]
    targets = [((float(i), 1.0), 1.0) for i in range(2)] + [((4.0, 1.0), 1.0)]
    problem = TransportProblem.from_atoms(sources, targets, SQRT, Anisotropy.euclidean())
    with pytest.raises(SizeLimitError):
        brute_force_oracle(problem, [(0.0, 0.0)])


def test_verification_detects_cycles_and_gaps():
    problem = y_instance(2.0)
    net = solve(problem).best
    loop = PolyhedralOneCurrent.polyline([(2, 0), (3, 0), (3, 1), (2, 0)])
    cyclic = net.current + loop
    broken = dataclasses.replace(net, current=cyclic, cost=h_mass(cyclic, problem.H, problem.sigma))
    report = verify_network(broken, problem)
    assert report.boundary_ok
    assert not report.acyclic
    assert not report.all_ok

    C = net.current
    missing = PolyhedralOneCurrent(C.A[1:], C.B[1:], C.theta[1:])
    cut = dataclasses.replace(net, current=missing, cost=h_mass(missing, problem.H, problem.sigma))
    report = verify_network(cut, problem)
    assert not report.boundary_ok
    assert report.boundary_diff
    assert is_acyclic(missing)
    assert not boundary(missing).equals(problem.required_boundary())
