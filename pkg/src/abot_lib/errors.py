# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""Exception hierarchy for the transport library."""

from src.constants import EXIT_PARSE_ERROR, EXIT_SEMANTIC_ERROR


class AbotError(Exception):
    """Base class for every library error. `exit_code` is what the CLI returns."""

    exit_code = EXIT_SEMANTIC_ERROR


class DomainError(AbotError, ValueError):
    """Input outside the domain of an operation (non-finite multiplicity, zero direction, bad parameter)."""


class DimensionMismatchError(AbotError, ValueError):
    pass


class DegenerateEdgeError(AbotError, ValueError):
    """Zero-length segment or polygon edge."""


class NumericalDegeneracyError(AbotError, ArithmeticError):
    """A consistency check of a geometric construction failed numerically."""


class NonConvexAnisotropyError(AbotError, ValueError):
    pass


class DepthOverflowError(AbotError, ValueError):
    pass


class DegenerateSliceError(AbotError, ValueError):
    """The fiber of a slice contains an edge of the current."""


class NonConformingMeshError(AbotError, ValueError):
    pass


class UnsupportedDimensionError(AbotError, ValueError):
    pass


class UnbalancedProblemError(AbotError, ValueError):
    pass


class SizeLimitError(AbotError, ValueError):
    pass


class ProblemParseError(AbotError, ValueError):
    """Malformed input file. Carries the location when the parser reports one."""

    exit_code = EXIT_PARSE_ERROR

    def __init__(self, message: str, line: int = None, column: int = None):
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column
