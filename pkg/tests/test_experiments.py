# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from src.abot_lib.anisotropy import Anisotropy, BranchingFunction, SymmetricPolygon
from src.abot_lib.currents import PolyhedralOneCurrent, h_mass
from src.abot_lib.errors import DomainError, UnsupportedDimensionError
from src.abot_lib.experiments import (locate_branch_crossover, lsc_experiment, oscillation, staircase,
                                      verify_slicing, y_height_oracle, y_instance)
from src.abot_lib.solver import solve
from src.abot_lib.svg import render_current, render_network

SQRT = BranchingFunction.power(0.5)
SVG = '{http://www.w3.org/2000/svg}'


# ----------------------------------------
# Sequence families
# ----------------------------------------

@pytest.mark.parametrize("k", [1, 3, 8])
def test_family_lengths(k):
    assert h_mass(staircase(k), SQRT, Anisotropy.euclidean()) == pytest.approx(2.0)
    assert h_mass(oscillation(k), SQRT, Anisotropy.euclidean()) == pytest.approx(math.sqrt(2))


def test_staircase_lsc_euclidean():
    result = lsc_experiment('staircase', [8, 1, 4, 2], SQRT, Anisotropy.euclidean())
    assert [r.k for r in result.rows] == [1, 2, 4, 8]
    assert result.limit_h_mass == pytest.approx(math.sqrt(2))
    assert result.min_h_mass == pytest.approx(2.0)
    assert result.liminf_ok
    assert result.flat_decreasing
    assert [r.flat_bound for r in result.rows] == pytest.approx([0.5, 0.25, 0.125, 0.0625])


def test_staircase_lsc_l1_is_tight():
    result = lsc_experiment('staircase', [1, 2, 4], SQRT, Anisotropy.lp(1))
    assert result.limit_h_mass == pytest.approx(2.0)
    assert result.min_h_mass == pytest.approx(2.0)
    assert result.liminf_ok


def test_oscillation_lsc():
    result = lsc_experiment('oscillation', [1, 2, 4], SQRT, Anisotropy.euclidean())
    assert result.limit_h_mass == pytest.approx(1.0)
    assert all(r.h_mass == pytest.approx(math.sqrt(2)) for r in result.rows)
    assert result.liminf_ok
    assert result.flat_decreasing
    assert result.recovery_flat == 0.0
    assert result.recovery_h_mass == result.limit_h_mass


def test_lsc_bad_arguments():
    with pytest.raises(DomainError):
        lsc_experiment('spiral', [1], SQRT, Anisotropy.euclidean())
    with pytest.raises(DomainError):
        lsc_experiment('staircase', [], SQRT, Anisotropy.euclidean())
    with pytest.raises(DomainError):
        staircase(0)


# ----------------------------------------
# Slicing identity
# ----------------------------------------

def test_slicing_on_polygonal_gauge(rng):
    gauge = Anisotropy.polygonal(SymmetricPolygon.random_symmetric(rng, 4))
    instances = [('staircase', staircase(3)), ('oscillation', oscillation(2)),
                 ('empty', PolyhedralOneCurrent.empty())]
    rows = verify_slicing(instances, gauge, SQRT)
    assert [r.instance for r in rows] == ['staircase', 'oscillation', 'empty']
    assert all(r.passed for r in rows)
    assert rows[2].direct == 0.0 and rows[2].diff == 0.0


def random_edges(rng):
    n = int(rng.integers(1, 21))
    A = rng.uniform(-1, 1, size=(n, 2))
    B = rng.uniform(-1, 1, size=(n, 2))
    return PolyhedralOneCurrent(A, B, rng.uniform(-5, 5, size=n))


@pytest.mark.parametrize("seed", range(5))
def test_slicing_over_random_currents(seed):
    rng = np.random.default_rng(seed)
    gauge = Anisotropy.polygonal(SymmetricPolygon.random_symmetric(rng, int(rng.integers(2, 9))))
    instances = [(f"current_{i}", random_edges(rng)) for i in range(100)]
    rows = verify_slicing(instances, gauge, SQRT)
    assert len(rows) == 100
    for row in rows:
        assert row.passed, row.instance
        assert row.diff <= 1e-8 * max(1.0, row.direct)


def test_slicing_on_smooth_gauge():
    rows = verify_slicing([('staircase', staircase(2))], Anisotropy.lp(3), SQRT, depth=10)
    assert rows[0].passed
    assert rows[0].bound > 0


def test_slicing_is_planar():
    with pytest.raises(UnsupportedDimensionError):
        verify_slicing([], Anisotropy.euclidean(3), SQRT)


# ----------------------------------------
# Branching transition
# ----------------------------------------

def test_y_height_oracle():
    s, cost = y_height_oracle(2.0)
    assert s == pytest.approx(1.0, abs=1e-6)
    assert cost == pytest.approx(3 * math.sqrt(2))
    assert y_height_oracle(0.5)[0] == pytest.approx(0.5, abs=1e-6)


def test_solver_agrees_with_height_oracle():
    for h in (1.5, 2.0, 3.0):
        assert solve(y_instance(h)).best.cost == pytest.approx(y_height_oracle(h)[1], abs=1e-6)


def test_branch_crossover_near_unit_height():
    h_star = locate_branch_crossover(y_instance, 0.5, 2.0)
    assert h_star == pytest.approx(1.0, abs=1e-3)


def test_crossover_needs_a_transition():
    with pytest.raises(DomainError):
        locate_branch_crossover(y_instance, 1.5, 2.0)


# ----------------------------------------
# Drawing
# ----------------------------------------

def test_render_network():
    problem = y_instance(2.0)
    net = solve(problem).best
    svg = render_network(net.current, problem.H, problem.source_points, problem.target_points,
                         net.steiner_positions, title='y')
    root = ET.fromstring(svg)
    assert root.tag == SVG + 'svg'
    assert len(root.findall(f'.//{SVG}line')) == 3
    groups = {g.get('class'): g for g in root.iter(SVG + 'g') if g.get('class')}
    assert len(groups['sources'].findall(SVG + 'circle')) == 2
    assert len(groups['targets'].findall(SVG + 'circle')) == 1
    assert len(groups['steiner'].findall(SVG + 'circle')) == 1
    assert render_network(net.current, problem.H, problem.source_points, problem.target_points,
                          net.steiner_positions, title='y') == svg


def test_render_current_strokes_follow_sign():
    P = PolyhedralOneCurrent.from_edges([((0, 0), (1, 0), 4.0), ((0, 1), (1, 1), -1.0)])
    root = ET.fromstring(render_current(P, SQRT))
    lines = root.findall(f'.//{SVG}line')
    widths = sorted(float(line.get('stroke-width')) for line in lines)
    assert widths == pytest.approx([4.0, 8.0])
    assert {line.get('stroke') for line in lines} == {'#1f4e79', '#b03a2e'}


def test_render_rejects_spatial_currents():
    P = PolyhedralOneCurrent.from_edges([((0, 0, 0), (1, 0, 0), 1.0)], dim=3)
    with pytest.raises(UnsupportedDimensionError):
        render_current(P, SQRT)
