# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Constants for the anisotropic branched transport toolkit.

This module centralizes the numerical tolerances, size limits and exit codes used
across the library and the batch front-end.
"""

# ----------------------------------------
# Tolerances
# ----------------------------------------

# Absolute tolerance for branching-function axiom checks (evenness, subadditivity, monotonicity)
AXIOM_TOL = 1e-12

# Absolute geometric tolerance: points closer than this are snapped together
GEOM_TOL = 1e-9

# Reconstruction tolerance for polygon decompositions
RECON_TOL = 1e-9

# Angular tolerance for the n_k - n_{k-1} // w_k parallel check
PARALLEL_TOL = 1e-8

# A hypermetric violation must exceed this value to be certified
HYPERMETRIC_TOL = 1e-9

# Stopping tolerance on cost decrease for position optimization
OPTIMIZER_TOL = 1e-8

# Tolerance for the triangle inequality in convexity checks
CONVEXITY_TOL = 1e-12

# Weights whose absolute value is below this are treated as zero after merging
ZERO_WEIGHT_TOL = 1e-12

DEFAULT_TOLERANCES = {
    'geom': GEOM_TOL,
    'axiom': AXIOM_TOL,
    'recon': RECON_TOL,
    'parallel': PARALLEL_TOL,
    'hypermetric': HYPERMETRIC_TOL,
    'optimizer': OPTIMIZER_TOL,
}

# ----------------------------------------
# Sampling
# ----------------------------------------

# Probes for the finite proxy of lim_{y -> 0+} H(y)/y = +inf
BLOWUP_PROBES = [10.0 ** (-k) for k in range(1, 9)]

# Direction grid used for uniform reconstruction errors of representing measures
DIRECTION_GRID_SIZE = 720

# Default direction grid for convexity checks
CONVEXITY_SAMPLES = 360

# Edges leaving a vertex within this angle (radians) are merged by the local-search move
MERGE_ANGLE = 0.5

# Default grid for branching axiom checks
AXIOM_GRID_POINTS = 100

# ----------------------------------------
# Size limits
# ----------------------------------------

MIN_APPROX_DEPTH = 2
MAX_APPROX_DEPTH = 16
DEFAULT_APPROX_DEPTH = 12

MAX_HYPERMETRIC_POINTS = 7

MAX_EXHAUSTIVE_TERMINALS = 6
MAX_ORACLE_TERMINALS = 4
MAX_ORACLE_GRID = 100
MAX_ORACLE_STEINER = 2

# ----------------------------------------
# Output
# ----------------------------------------

FLOAT_SIG_DIGITS = 17

EXIT_OK = 0
EXIT_PARSE_ERROR = 2
EXIT_SEMANTIC_ERROR = 3
EXIT_BUDGET_EXCEEDED = 4

# Batch commands understood by run_abot.py
COMMANDS = [
    'solve',
    'ig-decompose',
    'ig-approximate',
    'hypermetric',
    'verify-slicing',
    'lsc-experiment',
    'flatnorm',
]
