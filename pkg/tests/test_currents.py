# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

from src.abot_lib.anisotropy import Anisotropy, BranchingFunction, SymmetricPolygon
from src.abot_lib.currents import (PolyhedralOneCurrent, SliceSpec, ZeroCurrent, boundary, canonicalize, find_cycle,
                                   h_mass, h_mass_by_fiber_integration, h_mass_via_slicing, is_acyclic, is_subcurrent,
                                   mass, mass_bound_constant, max_multiplicity, remove_cycles, slice_current)
from src.abot_lib.errors import (DegenerateEdgeError, DegenerateSliceError, DomainError,
                                 UnsupportedDimensionError)
from src.abot_lib.igrep import DirectionMeasure, polygon_decompose

SQRT = BranchingFunction.power(0.5)
EUCLID = Anisotropy.euclidean()


def edge_set(P):
    return {(a, b, round(t, 12)) for a, b, t in canonicalize(P).edges()}


def random_current(rng, n_edges=5):
    A = rng.uniform(0, 1, size=(n_edges, 2))
    B = rng.uniform(0, 1, size=(n_edges, 2))
    theta = rng.choice([-1, 1], size=n_edges) * rng.uniform(0.5, 5.0, size=n_edges)
    return PolyhedralOneCurrent(A, B, theta)


# ----------------------------------------
# Zero-currents
# ----------------------------------------

def test_zero_current_merges_and_sorts():
    Z = ZeroCurrent.from_atoms([((1.0, 0.0), 2.0), ((0.0, 0.0), 1.0), ((1.0, 1e-12), -0.5)])
    assert list(Z.atoms()) == [((0.0, 0.0), 1.0), ((1.0, 0.0), 1.5)]
    assert Z.mass == pytest.approx(2.5)
    assert Z.h_mass(SQRT) == pytest.approx(1 + math.sqrt(1.5))


def test_zero_current_arithmetic():
    S = ZeroCurrent.from_atoms([((0.0, 0.0), 1.0)])
    T = ZeroCurrent.from_atoms([((1.0, 0.0), 1.0)])
    assert (S - S).is_zero
    D = T - S
    assert D.equals(ZeroCurrent.from_atoms([((0.0, 0.0), -1.0), ((1.0, 0.0), 1.0)]))
    assert D.positive_part().equals(T)
    assert (D * 2).mass == pytest.approx(4.0)
    assert (-D).equals(S - T)


# ----------------------------------------
# Canonical form
# ----------------------------------------

def test_canonicalize_splits_overlaps():
    P = PolyhedralOneCurrent.from_edges([((0, 0), (2, 0), 1.0), ((1, 0), (3, 0), 1.0)])
    C = canonicalize(P)
    assert list(C.edges()) == [((0.0, 0.0), (1.0, 0.0), 1.0),
                               ((1.0, 0.0), (2.0, 0.0), 2.0),
                               ((2.0, 0.0), (3.0, 0.0), 1.0)]
    assert h_mass(P, SQRT, EUCLID) == pytest.approx(2 + math.sqrt(2))
    assert mass(P) == pytest.approx(4.0)


def test_canonicalize_orients_lexicographically():
    P = PolyhedralOneCurrent.from_edges([((1, 0), (0, 0), 2.0)])
    assert list(canonicalize(P).edges()) == [((0.0, 0.0), (1.0, 0.0), -2.0)]


def test_opposite_edges_cancel():
    P = PolyhedralOneCurrent.polyline([(0, 0), (1, 1), (2, 0)])
    assert len(canonicalize(P - P)) == 0
    assert len(canonicalize(P + (-P))) == 0


def test_canonicalize_is_idempotent(rng):
    P = random_current(rng, 8)
    C = canonicalize(P)
    assert edge_set(C) == edge_set(canonicalize(C))
    assert h_mass(C, SQRT, EUCLID) == pytest.approx(h_mass(P, SQRT, EUCLID))


def test_degenerate_and_invalid_edges():
    with pytest.raises(DegenerateEdgeError):
        PolyhedralOneCurrent.from_edges([((0, 0), (0, 0), 1.0)])
    with pytest.raises(DomainError):
        PolyhedralOneCurrent.from_edges([((0, 0), (1, 0), math.inf)])


# ----------------------------------------
# Boundary and masses
# ----------------------------------------

def test_boundary_of_polyline():
    P = PolyhedralOneCurrent.polyline([(0, 0), (1, 0), (1, 1)], theta=2.0)
    expected = ZeroCurrent.from_atoms([((0.0, 0.0), -2.0), ((1.0, 1.0), 2.0)])
    assert boundary(P).equals(expected, tol=1e-12)


def test_boundary_of_closed_loop_vanishes():
    loop = PolyhedralOneCurrent.polyline([(0, 0), (1, 0), (1, 1), (0, 0)])
    assert boundary(loop).is_zero


def test_anisotropic_h_mass():
    P = PolyhedralOneCurrent.from_edges([((0, 0), (1, 1), 4.0)])
    assert h_mass(P, SQRT, Anisotropy.lp(1)) == pytest.approx(2.0 * 2.0)
    assert h_mass(P, SQRT, Anisotropy.lp(math.inf)) == pytest.approx(2.0)
    assert h_mass(PolyhedralOneCurrent.empty(), SQRT, EUCLID) == 0.0


def test_max_multiplicity_after_merging():
    P = PolyhedralOneCurrent.from_edges([((0, 0), (2, 0), 1.5), ((0, 0), (1, 0), 1.0)])
    assert max_multiplicity(P) == pytest.approx(2.5)


# ----------------------------------------
# Slices
# ----------------------------------------

def test_slice_of_segment():
    P = PolyhedralOneCurrent.from_edges([((0, 0), (2, 0), 1.0)])
    fiber = slice_current(P, SliceSpec((1.0, 0.0), 1.0))
    assert list(fiber.atoms()) == [((1.0, 0.0), 1.0)]
    # reversed projection flips the sign
    flipped = slice_current(P, SliceSpec((-1.0, 0.0), -1.0))
    assert list(flipped.atoms()) == [((1.0, 0.0), -1.0)]


def test_slice_is_half_open():
    P = PolyhedralOneCurrent.polyline([(0, 0), (1, 0), (2, 0)])
    assert slice_current(P, SliceSpec((1.0, 0.0), 2.0)).is_zero
    through_vertex = PolyhedralOneCurrent.polyline([(0, 0), (1, 1), (2, 0)])
    fiber = slice_current(through_vertex, SliceSpec((1.0, 0.0), 1.0))
    assert list(fiber.atoms()) == [((1.0, 1.0), 1.0)]


def test_slice_containing_an_edge():
    P = PolyhedralOneCurrent.from_edges([((0, 0), (0, 1), 1.0)])
    with pytest.raises(DegenerateSliceError):
        slice_current(P, SliceSpec((1.0, 0.0), 0.0))
    with pytest.raises(DomainError):
        SliceSpec((0.0, 0.0), 0.0)


def test_slice_sums_crossing_multiplicities():
    P = PolyhedralOneCurrent.from_edges([((0, -1), (0, 1), 2.0), ((1, -1), (1, 1), -1.0),
                                         ((0, 1), (0, 3), 1.0)])
    fiber = slice_current(P, SliceSpec((0.0, 1.0), 0.0))
    assert list(fiber.atoms()) == [((0.0, 0.0), 2.0), ((1.0, 0.0), -1.0)]
    assert fiber.mass == pytest.approx(3.0)


def test_slicing_formula_matches_fiber_integration(rng):
    mu = polygon_decompose(SymmetricPolygon.from_half([[1, 0], [0, 1]])).to_measure()
    for _ in range(5):
        P = random_current(rng, 5)
        closed_form = h_mass_via_slicing(P, SQRT, mu)
        integrated = h_mass_by_fiber_integration(P, SQRT, mu)
        assert integrated == pytest.approx(closed_form, rel=1e-9)


def test_slicing_with_exact_polygon_measure(rng):
    square = SymmetricPolygon.from_half([[1, 1], [-1, 1]])
    mu = polygon_decompose(square).to_measure()
    sigma = Anisotropy.polygonal(square)
    P = random_current(rng, 7)
    assert h_mass_via_slicing(P, SQRT, mu) == pytest.approx(h_mass(P, SQRT, sigma), rel=1e-12)


def test_slicing_edge_cases(caplog):
    P = PolyhedralOneCurrent.from_edges([((0, 0), (1, 0), 1.0)])
    assert h_mass_via_slicing(P, SQRT, DirectionMeasure.empty()) == 0.0
    assert "Empty direction measure" in caplog.text
    spatial = PolyhedralOneCurrent.from_edges([((0, 0, 0), (1, 0, 0), 1.0)], dim=3)
    mu = DirectionMeasure([[1.0, 0.0]], [1.0])
    with pytest.raises(UnsupportedDimensionError):
        h_mass_via_slicing(spatial, SQRT, mu)


# ----------------------------------------
# Cycles
# ----------------------------------------

def triangle_with_tail():
    loop = PolyhedralOneCurrent.polyline([(0, 0), (1, 0), (1, 1), (0, 0)], theta=1.0)
    tail = PolyhedralOneCurrent.from_edges([((0, 0), (1, 0), 2.0), ((1, 0), (3, 0), 3.0)])
    return loop + tail


def test_find_cycle_on_acyclic_current():
    P = PolyhedralOneCurrent.polyline([(0, 0), (1, 0), (1, 1)])
    assert find_cycle(P) is None
    assert is_acyclic(P)


def test_find_cycle_returns_dominated_cycle():
    P = triangle_with_tail()
    assert not is_acyclic(P)
    cycle = find_cycle(P)
    assert cycle is not None
    assert boundary(cycle).is_zero
    assert np.allclose(np.abs(cycle.theta), 1.0)
    assert is_subcurrent(cycle, P)


def test_remove_cycles_keeps_boundary_and_lowers_cost():
    P = triangle_with_tail()
    R = remove_cycles(P, SQRT, EUCLID)
    assert is_acyclic(R)
    assert (boundary(R) - boundary(P)).is_zero
    assert h_mass(R, SQRT, EUCLID) < h_mass(P, SQRT, EUCLID)


def random_cyclic_current(rng):
    corners = rng.uniform(0, 1, size=(int(rng.integers(3, 6)), 2))
    loop = PolyhedralOneCurrent.polyline(np.vstack([corners, corners[:1]]), theta=float(rng.uniform(0.5, 2.0)))
    return loop + random_current(rng, int(rng.integers(1, 6)))


@pytest.mark.parametrize("seed", range(50))
def test_remove_cycles_on_random_cyclic_currents(seed):
    P = random_cyclic_current(np.random.default_rng(seed))
    assert not is_acyclic(P)
    R = remove_cycles(P, SQRT, EUCLID)
    assert is_acyclic(R)
    assert (boundary(R) - boundary(P)).is_zero
    assert h_mass(R, SQRT, EUCLID) < h_mass(P, SQRT, EUCLID) - 1e-9


def test_remove_cycles_strict_decrease():
    square = PolyhedralOneCurrent.polyline([(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)], theta=1.0)
    P = square + PolyhedralOneCurrent.from_edges([((0, 0), (1, 0), 3.0)])
    R = remove_cycles(P, SQRT, EUCLID)
    # the bottom edge keeps multiplicity 3 + 1 - 1, the other three sides vanish
    assert edge_set(R) == {((0.0, 0.0), (1.0, 0.0), 3.0)}
    assert h_mass(P, SQRT, EUCLID) - h_mass(R, SQRT, EUCLID) == pytest.approx(2.0 + 3 - math.sqrt(3))


def test_find_cycle_on_figure_eight_picks_smallest_vertices():
    # two loops sharing the origin; the left loop has the smaller vertex indices
    right = PolyhedralOneCurrent.polyline([(0, 0), (1, 0), (1, 1), (0, 0)], theta=1.0)
    left = PolyhedralOneCurrent.polyline([(0, 0), (-1, 0), (-1, -1), (0, 0)], theta=2.0)
    for P in (right + left, left + right):
        cycle = find_cycle(P)
        assert cycle is not None
        assert boundary(cycle).is_zero
        assert np.all(cycle.A[:, 0] <= 0) and np.all(cycle.B[:, 0] <= 0)
        assert np.allclose(np.abs(cycle.theta), 2.0)
        assert is_subcurrent(cycle, P)


def test_mass_bound_constant():
    assert mass_bound_constant(SQRT, EUCLID, 4.0) == pytest.approx(2.0)
    assert mass_bound_constant(SQRT, Anisotropy.lp(math.inf), 4.0) == pytest.approx(2.0 * math.sqrt(2))
    with pytest.raises(DomainError):
        mass_bound_constant(SQRT, EUCLID, 0.0)
