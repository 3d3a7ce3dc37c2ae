# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

import math
import threading

import numpy as np
import pytest

from src.abot_lib.anisotropy import Anisotropy, SymmetricPolygon, anisotropic_norms
from src.abot_lib.errors import (DepthOverflowError, DomainError, NonConvexAnisotropyError,
                                 UnsupportedDimensionError)
from src.abot_lib.igrep import (DirectionMeasure, HalfSpaceCache, HypermetricCertificate, approximate_body,
                                approximation_sequence, coefficient_vectors, default_point_grid, edge_normals,
                                hausdorff_to_body, hypermetric_search, hypermetric_value,
                                integral_geometric_status, polygon_decompose, reconstruction_error,
                                representing_measure, rotate_generic)

DIAMOND = SymmetricPolygon.from_half([[1, 0], [0, 1]])
SQUARE = SymmetricPolygon.from_half([[1, 1], [-1, 1]])

# K_{2,3} inside the cube {-1, 0, 1}^3 with the maximum norm
K23_POINTS = [(0, 1, 1), (0, -1, -1), (0, 1, -1), (1, 0, 0), (-1, 0, 0)]
K23_COEFFICIENTS = (1, 1, 1, -1, -1)


# ----------------------------------------
# Direction measures
# ----------------------------------------

def test_direction_measure_folds_and_merges():
    mu = DirectionMeasure([[0.0, 1.0], [0.0, -2.0], [1.0, 0.0]], [1.0, 0.5, 2.0])
    assert len(mu) == 2
    assert mu.total_mass == pytest.approx(3.5)
    assert np.allclose(mu.omegas, [[1.0, 0.0], [0.0, 1.0]], atol=1e-15)
    assert np.allclose(mu.masses, [2.0, 1.5])
    assert mu.reconstruct([[3.0, -4.0]])[0] == pytest.approx(2.0 * 3.0 + 1.5 * 4.0)


def test_direction_measure_json():
    mu = DirectionMeasure([[1.0, 1.0]], [2.0])
    again = DirectionMeasure.from_json(mu.to_json())
    assert np.allclose(again.omegas, mu.omegas)
    assert np.allclose(again.masses, mu.masses)
    assert len(DirectionMeasure.from_json([])) == 0


def test_direction_measure_validation():
    with pytest.raises(DomainError):
        DirectionMeasure([[1.0, 0.0]], [0.0])
    with pytest.raises(DomainError):
        DirectionMeasure([[0.0, 0.0]], [1.0])


# ----------------------------------------
# Polygon decomposition
# ----------------------------------------

def test_edge_normals_support_the_edges():
    normals = edge_normals(SQUARE)
    v = SQUARE.vertices
    assert np.allclose(np.einsum('ij,ij->i', normals, v), 1.0)
    assert np.allclose(np.einsum('ij,ij->i', normals, np.roll(v, -1, axis=0)), 1.0)


def test_rotate_generic_clears_the_axes():
    rotated, angle = rotate_generic(DIAMOND)
    assert angle != 0.0
    assert np.all(np.abs(rotated.vertices) > 1e-4)
    generic = SymmetricPolygon.regular(3, phase=0.3)
    assert rotate_generic(generic)[1] == 0.0


def test_diamond_decomposition():
    dec = polygon_decompose(DIAMOND)
    assert np.allclose(dec.weights, [1.0, 1.0], atol=1e-9)
    assert dec.norm([3.0, -4.0]) == pytest.approx(7.0)
    assert dec.weight_sum <= dec.weight_bound


def test_square_decomposition():
    dec = polygon_decompose(SQUARE)
    assert np.allclose(dec.weights, [0.5, 0.5], atol=1e-9)
    assert dec.norm([0.5, -2.0]) == pytest.approx(2.0)


def test_random_polygon_reconstruction(rng):
    for N in (2, 3, 4, 6, 9):
        P = SymmetricPolygon.random_symmetric(rng, N)
        dec = polygon_decompose(P)
        assert np.all(dec.weights > 0)
        assert np.allclose(dec.norm(P.boundary_points(rng, 200)), 1.0, atol=1e-9)
        assert dec.weight_sum <= 8.0 / P.inradius() + 1e-9


@pytest.mark.parametrize("seed", range(100))
def test_random_polygon_reconstruction_up_to_fifty_pairs(seed):
    rng = np.random.default_rng(seed)
    P = SymmetricPolygon.random_symmetric(rng, int(rng.integers(2, 51)))
    dec = polygon_decompose(P)
    assert np.all(dec.weights > 0)
    assert np.max(np.abs(dec.norm(P.boundary_points(rng, 1000)) - 1.0)) <= 1e-9
    assert dec.weight_sum <= 8.0 / P.inradius() + 1e-9


def test_decomposition_measure_represents_polygon(rng):
    P = SymmetricPolygon.random_symmetric(rng, 5)
    mu = polygon_decompose(P).to_measure()
    sigma = Anisotropy.polygonal(P)
    assert reconstruction_error(mu, sigma) < 1e-9


# ----------------------------------------
# Outer approximation
# ----------------------------------------

def test_disc_depth_two_is_the_square():
    P = approximate_body(Anisotropy.euclidean(), 2)
    assert P.vertices.shape == (4, 2)
    assert np.allclose(np.linalg.norm(P.vertices, axis=1), math.sqrt(2))


def test_approximation_contains_the_body_and_converges():
    gauge = Anisotropy.fourier(1.0, cos=[0.0, 0.1])
    depths = list(range(2, 9))
    polygons = approximation_sequence(gauge, depths)
    boundary = np.array([[math.cos(t), math.sin(t)] for t in np.linspace(0, 2 * math.pi, 400)])
    boundary = boundary / anisotropic_norms(gauge, boundary)[:, None]
    for P in polygons:
        assert np.all(P.gauge(boundary) <= 1.0 + 1e-6)
    assert hausdorff_to_body(polygons[-1], gauge) < hausdorff_to_body(polygons[0], gauge)


def test_disc_approximation_distance_is_monotone():
    gauge = Anisotropy.euclidean()
    distances = [hausdorff_to_body(P, gauge) for P in approximation_sequence(gauge, range(2, 10))]
    assert all(b <= a + 1e-12 for a, b in zip(distances[:-1], distances[1:]))
    assert distances[0] == pytest.approx(math.sqrt(2) - 1)


def test_approximations_are_nested():
    gauge = Anisotropy.euclidean()
    coarse, fine = approximation_sequence(gauge, [4, 6])
    assert np.all(coarse.gauge(fine.vertices) <= 1.0 + 1e-12)


def test_half_space_cache_reuses_lines():
    gauge = Anisotropy.euclidean()
    cache = HalfSpaceCache(gauge)
    approximate_body(gauge, 3, cache=cache)
    size = len(cache)
    approximate_body(gauge, 4, cache=cache)
    assert cache.hits >= size
    with pytest.raises(DomainError):
        approximate_body(Anisotropy.lp(3), 3, cache=cache)


@pytest.mark.parametrize("depth", [1, 17])
def test_depth_limits(depth):
    with pytest.raises(DepthOverflowError):
        approximate_body(Anisotropy.euclidean(), depth)


def test_approximation_needs_planar_convex_gauge():
    with pytest.raises(UnsupportedDimensionError):
        approximate_body(Anisotropy.euclidean(3), 4)
    root = Anisotropy.from_norm(lambda U: (np.sqrt(np.abs(U[:, 0])) + np.sqrt(np.abs(U[:, 1]))) ** 2, 2)
    with pytest.raises(NonConvexAnisotropyError):
        approximate_body(root, 4)


# ----------------------------------------
# Representing measures
# ----------------------------------------

def test_disc_measure():
    mu = representing_measure(Anisotropy.euclidean(), depth=12)
    assert mu.depth == 12
    assert mu.error <= 1e-3
    assert mu.total_mass == pytest.approx(math.pi / 2, rel=1e-2)
    assert mu.total_mass <= mu.mass_bound


def test_polygonal_measure_is_exact():
    mu = representing_measure(Anisotropy.lp(math.inf))
    assert mu.depth is None
    assert len(mu) == 2
    assert mu.error < 1e-12


def test_measure_error_decreases_with_depth():
    gauge = Anisotropy.lp(3)
    errors = [representing_measure(gauge, depth=k).error for k in (4, 8, 12)]
    assert errors[0] > errors[1] > errors[2]


def test_representing_measure_is_planar():
    with pytest.raises(UnsupportedDimensionError):
        representing_measure(Anisotropy.lp(3, dim=3))


# ----------------------------------------
# Hypermetric inequalities
# ----------------------------------------

def test_k23_value_under_maximum_norm():
    linf = Anisotropy.lp(math.inf, dim=3)
    assert hypermetric_value(linf, K23_POINTS, K23_COEFFICIENTS) == pytest.approx(2.0)
    l1 = Anisotropy.lp(1, dim=3)
    assert hypermetric_value(l1, K23_POINTS, K23_COEFFICIENTS) <= 1e-12


def test_coefficient_vectors():
    X = coefficient_vectors(3, 1)
    assert X.shape == (3, 3)
    assert np.all(X.sum(axis=1) == 1)
    assert coefficient_vectors(4, 1).shape[0] == 0
    assert np.all(coefficient_vectors(4, 2) != 0)


def test_default_point_grid():
    grid = default_point_grid(3)
    assert grid.shape == (27, 3)
    assert tuple(grid[0]) == (-1.0, -1.0, -1.0)


def test_maximum_norm_violation_is_found():
    linf = Anisotropy.lp(math.inf, dim=3)
    certificate = hypermetric_search(linf, max_points=5, coeff_bound=1)
    assert certificate is not None
    assert sum(certificate.coefficients) == 1
    assert certificate.value > 0
    assert hypermetric_value(linf, certificate.points, certificate.coefficients) == pytest.approx(certificate.value)


def test_search_is_independent_of_threads():
    linf = Anisotropy.lp(math.inf, dim=3)
    one = hypermetric_search(linf, max_points=5, coeff_bound=1, threads=1)
    four = hypermetric_search(linf, max_points=5, coeff_bound=1, threads=4)
    assert one.to_json() == four.to_json()


def test_threaded_search_releases_workers():
    before = threading.active_count()
    hypermetric_search(Anisotropy.lp(math.inf, dim=3), max_points=5, coeff_bound=1, threads=4)
    assert threading.active_count() == before


@pytest.mark.slow
@pytest.mark.parametrize("p", [1, 2])
def test_hypermetric_norms_have_no_violation(p):
    assert hypermetric_search(Anisotropy.lp(p, dim=3), max_points=5, coeff_bound=2) is None


@pytest.mark.slow
def test_maximum_norm_violation_with_full_budget():
    linf = Anisotropy.lp(math.inf, dim=3)
    certificate = hypermetric_search(linf, max_points=7, coeff_bound=2)
    assert certificate is not None
    assert len(certificate.points) <= 7
    assert hypermetric_value(linf, certificate.points, certificate.coefficients) == pytest.approx(certificate.value)


@pytest.mark.slow
@pytest.mark.parametrize("p", [1, 2])
def test_hypermetric_norms_pass_seven_point_search(p):
    grid = K23_POINTS + [(0, 0, 0), (1, 1, 1), (-1, 1, 0), (1, -1, 1), (0, 0, -1)]
    assert hypermetric_search(Anisotropy.lp(p, dim=3), max_points=7, coeff_bound=2, point_grid=grid) is None


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_random_planar_polygonal_norms_have_no_violation(seed):
    rng = np.random.default_rng(seed)
    norm = Anisotropy.polygonal(SymmetricPolygon.random_symmetric(rng, int(rng.integers(2, 7))))
    assert hypermetric_search(norm, max_points=7, coeff_bound=2) is None
    assert integral_geometric_status(norm).status == 'representable'


def test_planar_norm_has_no_small_violation():
    assert hypermetric_search(Anisotropy.lp(math.inf), max_points=4, coeff_bound=2) is None


def test_search_budget_limits():
    with pytest.raises(DomainError):
        hypermetric_search(Anisotropy.lp(1, dim=3), max_points=8)
    with pytest.raises(DomainError):
        HypermetricCertificate(points=((0.0,), (1.0,)), coefficients=(1, 1), value=1.0)


def test_integral_geometric_status():
    assert integral_geometric_status(Anisotropy.euclidean(3)).status == 'representable'
    assert integral_geometric_status(Anisotropy.lp(1)).status == 'representable'
    status = integral_geometric_status(Anisotropy.lp(math.inf, dim=3), max_points=5, coeff_bound=1)
    assert status.status == 'not_representable'
    assert status.certificate is not None


def test_integral_geometric_status_uses_search_tolerance():
    linf = Anisotropy.lp(math.inf, dim=3)
    status = integral_geometric_status(linf, max_points=5, coeff_bound=1, tol=1e6)
    assert status.status == 'undetermined'
    assert status.certificate is None
