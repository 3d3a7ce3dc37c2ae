# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Anisotropic branched transport library: branching functions and anisotropies,
integral-geometric representation of planar norms, polyhedral currents, flat
distances and the desk-scale network solver.
"""

from .anisotropy import (Anisotropy, BranchingFunction, SymmetricPolygon, anisotropic_norm, anisotropic_norms,
                         check_branching_axioms, check_convexity, eval_branching)
from .currents import (PolyhedralOneCurrent, SliceSpec, ZeroCurrent, boundary, canonicalize, find_cycle,
                       h_mass, h_mass_via_slicing, mass, remove_cycles, slice_current)
from .errors import AbotError, ProblemParseError
from .flat_norm import Triangulation, flat_distance_one_upper, flat_distance_zero
from .igrep import (DirectionMeasure, approximate_body, hypermetric_search, integral_geometric_status,
                    polygon_decompose, representing_measure)
from .solver import (Network, SolveBudget, SolveResult, TransportProblem, brute_force_oracle, initial_feasible,
                     optimize_positions, solve, verify_network)
from .topology import Topology, enumerate_topologies

__all__ = [
    'Anisotropy',
    'BranchingFunction',
    'SymmetricPolygon',
    'anisotropic_norm',
    'anisotropic_norms',
    'check_branching_axioms',
    'check_convexity',
    'eval_branching',
    'PolyhedralOneCurrent',
    'SliceSpec',
    'ZeroCurrent',
    'boundary',
    'canonicalize',
    'find_cycle',
    'h_mass',
    'h_mass_via_slicing',
    'mass',
    'remove_cycles',
    'slice_current',
    'AbotError',
    'ProblemParseError',
    'Triangulation',
    'flat_distance_one_upper',
    'flat_distance_zero',
    'DirectionMeasure',
    'approximate_body',
    'hypermetric_search',
    'integral_geometric_status',
    'polygon_decompose',
    'representing_measure',
    'Network',
    'SolveBudget',
    'SolveResult',
    'TransportProblem',
    'brute_force_oracle',
    'initial_feasible',
    'optimize_positions',
    'solve',
    'verify_network',
    'Topology',
    'enumerate_topologies',
]
