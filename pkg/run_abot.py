#!/usr/bin/env python3

# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import argparse
import atexit
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

from src import wrapper
from src.abot_lib.errors import AbotError
from src.argparse_common import (add_common_arguments, add_validation_checks, parse_grid, parse_sweep,
                                 resolve_tolerances)
from src.config_manager import config
from src.constants import COMMANDS, MAX_APPROX_DEPTH, MIN_APPROX_DEPTH
from src.logging_util import cleanup_logging, setup_logging

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


def _depth(text: str) -> int:
    k = int(text)
    if not MIN_APPROX_DEPTH <= k <= MAX_APPROX_DEPTH:
        raise argparse.ArgumentTypeError(f"--depth must lie in [{MIN_APPROX_DEPTH}, {MAX_APPROX_DEPTH}]")
    return k


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Anisotropic branched transport toolkit (batch front-end).")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    help_text = {
        'solve': "Solve a transport problem; writes network.json, metrics.csv and network.svg.",
        'ig-decompose': "Decompose a symmetric polygon norm into line Jacobians.",
        'ig-approximate': "Nested polygonal approximation and representing measure of a planar gauge.",
        'hypermetric': "Search a violated hypermetric inequality for a norm.",
        'verify-slicing': "Compare H-masses with their slicing formula on planar currents.",
        'lsc-experiment': "Flat bounds and H-masses along a flat-converging sequence.",
        'flatnorm': "Flat distance between two currents.",
    }
    parsers = {}
    for command in COMMANDS:
        parsers[command] = sub.add_parser(command, help=help_text[command], description=help_text[command])
        add_common_arguments(parsers[command])

    solve = parsers['solve']
    solve.add_argument("--mode", choices=['exhaustive', 'local'], default=None,
                       help="Topology search mode (default: from the problem file, else exhaustive)")
    solve.add_argument("--max-steiner", type=int, default=None, help="Steiner node cap")
    solve.add_argument("--iters", type=int, default=None, help="Position optimizer iteration cap")
    solve.add_argument("--oracle-grid", type=parse_grid, default=None, metavar="GxG",
                       help="Also run the grid oracle on a GxG grid over the terminals' bounding box")
    solve.add_argument("--sweep", type=parse_sweep, default=None, metavar="var=a:b:step",
                       help="Solve once per value of a problem parameter")

    for command in ('ig-approximate', 'verify-slicing'):
        parsers[command].add_argument("--depth", type=_depth, default=None,
                                      help=f"Dyadic approximation depth (default: {config.get('ABOT_DEFAULT_DEPTH')})")

    flat = parsers['flatnorm']
    flat.add_argument("--against", required=True, type=str, help="Second current file")
    flat.add_argument("--mesh", type=str, default=None, help="Triangulation file for 1-currents")
    return parser


def dispatch(args: argparse.Namespace) -> int:
    runner = wrapper.AbotWrapper(args.input, prefix=args.out, seed=args.seed, threads=args.threads,
                                 tolerances=resolve_tolerances(args.tol))
    if args.command == 'solve':
        return runner.run_solve(mode=args.mode, max_steiner=args.max_steiner, oracle_shape=args.oracle_grid,
                                sweep=args.sweep, iters=args.iters)
    if args.command == 'ig-decompose':
        return runner.run_ig_decompose()
    if args.command == 'ig-approximate':
        return runner.run_ig_approximate(depth=args.depth)
    if args.command == 'hypermetric':
        return runner.run_hypermetric()
    if args.command == 'verify-slicing':
        return runner.run_verify_slicing(depth=args.depth)
    if args.command == 'lsc-experiment':
        return runner.run_lsc_experiment()
    return runner.run_flatnorm(args.against, mesh_path=args.mesh)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code (0, 2, 3 or 4)."""
    args = build_parser().parse_args(argv)
    add_validation_checks(args)

    # Set up logging to save output to run.log in the output directory
    setup_logging(args.out, config.get("ABOT_LOG_LEVEL"))

    # Register cleanup function to restore original streams on exit
    atexit.register(cleanup_logging)
    logger.debug(config.summary())

    try:
        code = dispatch(args)
        logger.info(f"{args.command} finished with exit code {code}")
        return code
    except AbotError as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        return e.exit_code
    finally:
        cleanup_logging()


if __name__ == "__main__":
    sys.exit(main())
