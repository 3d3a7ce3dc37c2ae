# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Common argparse utilities for the batch front-end.

Every subcommand of run_abot.py shares the input/output/seed/threads/tolerance flags
defined here, plus the small value parsers for sweeps, oracle grids and overrides.
"""

import argparse
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config_manager import config
from .constants import DEFAULT_TOLERANCES


def parse_tol(text: str) -> Tuple[str, float]:
    """
    Parse one NAME=VAL tolerance override.

    Raises:
        argparse.ArgumentTypeError: On an unknown name or a non-positive value
    """
    name, sep, value = text.partition('=')
    name = name.strip().lower()
    if not sep or name not in DEFAULT_TOLERANCES:
        raise argparse.ArgumentTypeError(
            f"Expected NAME=VAL with NAME in {sorted(DEFAULT_TOLERANCES)}, got '{text}'")
    try:
        tol = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Tolerance '{name}' needs a number, got '{value}'")
    if not tol > 0:
        raise argparse.ArgumentTypeError(f"Tolerance '{name}' must be positive, got {tol}")
    return name, tol


def parse_sweep(text: str) -> Tuple[str, List[float]]:
    """
    Parse var=a:b:step into the variable name and the inclusive list of values.

    Values are a + i * step for i = 0, 1, ... while they do not exceed b (with a
    1e-9 * step slack), rounded to 12 decimals so that 0.1 steps print cleanly.
    """
    name, sep, spec = text.partition('=')
    parts = spec.split(':')
    if not sep or not name.strip() or len(parts) != 3:
        raise argparse.ArgumentTypeError(f"Expected var=a:b:step, got '{text}'")
    try:
        a, b, step = (float(x) for x in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Sweep bounds must be numbers, got '{spec}'")
    if not step > 0 or b < a:
        raise argparse.ArgumentTypeError(f"Sweep needs a <= b and step > 0, got '{spec}'")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return name.strip(), [round(a + i * step, 12) for i in range(count)]


def parse_grid(text: str) -> Tuple[int, int]:
    """Parse GxG (e.g. 5x5) into the two grid sizes."""
    parts = text.lower().split('x')
    try:
        nx, ny = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected GxG, got '{text}'")
    if nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError(f"Grid sizes must be positive, got '{text}'")
    return nx, ny


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """
    Add the arguments shared by every subcommand.

    Args:
        parser: The (sub)parser to add arguments to
    """
    default_threads = config.get("ABOT_THREADS")
    default_prefix = config.get("ABOT_OUTPUT_PREFIX")
    default_seed = config.get("ABOT_SEED")

    parser.add_argument("-i", "--input", required=True, type=str,
                        help="Input file (JSON, or YAML by suffix).")
    parser.add_argument("-o", "--out", default=default_prefix, type=str,
                        help=f"Output directory (default: {default_prefix})")
    parser.add_argument("-s", "--seed", default=default_seed, type=int,
                        help=f"Seed fixing every stochastic choice (default: {default_seed})")
    parser.add_argument("-t", "--threads", default=default_threads, type=int,
                        help=f"Worker threads (default: {default_threads})")
    parser.add_argument("--tol", action="append", default=[], type=parse_tol, metavar="NAME=VAL",
                        help="Override a tolerance; repeatable. Names: " + ", ".join(sorted(DEFAULT_TOLERANCES)))


def add_validation_checks(args: argparse.Namespace) -> None:
    """
    Validate the shared arguments.

    Raises:
        SystemExit: If validation fails
    """
    if args.threads < 1:
        raise SystemExit("Error: --threads must be at least 1")
    args.input = clean_filename(args.input)


def resolve_tolerances(overrides: Optional[Sequence[Tuple[str, float]]] = None) -> Dict[str, float]:
    """Documented defaults, then ABOT_TOL_* configuration, then --tol overrides."""
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(config.get_tolerances())
    for name, value in overrides or ():
        tolerances[name] = value
    return tolerances


def clean_filename(filename: str) -> str:
    """Strip quotes left by shell wrappers."""
    return filename.replace('"', "").replace("'", "")
