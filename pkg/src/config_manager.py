# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Configuration Manager for the transport toolkit

Reads ABOT_* environment variables (and a .env file) into typed values. Only the
batch front-end consults it; library functions take their tolerances as arguments.
"""

import os
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional
from pathlib import Path

from dotenv import dotenv_values
from tabulate import tabulate

from src.constants import DEFAULT_TOLERANCES, DEFAULT_APPROX_DEPTH

logger = logging.getLogger(__name__)

# Prefix shared by every tolerance key, e.g. ABOT_TOL_GEOM
TOLERANCE_PREFIX = "ABOT_TOL_"


@dataclass(frozen=True)
class ConfigKey:
    default: Any
    cast: Callable[[str], Any]
    description: str = ""


class ConfigManager:
    """
    Typed view of the ABOT_* environment.

    A .env file fills in variables missing from the environment. Values that fail
    their cast fall back to the registered default with a warning.
    """

    def __init__(self, env_file: Optional[str] = ".env"):
        """
        Args:
            env_file: Path to .env file (None to skip loading)
        """
        self.config: Dict[str, Any] = {}
        self._registered_keys: Dict[str, ConfigKey] = {}

        if env_file:
            self._load_env_file(env_file)

        self._setup_default_configs()

    def _load_env_file(self, env_file: str) -> None:
        env_path = Path(env_file)
        if not env_path.exists():
            logger.debug(f"No .env file found at {env_path}, skipping")
            return

        try:
            for key, value in dotenv_values(env_path).items():
                if value is None:
                    logger.warning(f"Invalid line format in {env_file}: {key}")
                    continue
                if key not in os.environ:
                    os.environ[key] = value
                    logger.debug(f"Loaded {key} from .env file")
        except OSError as e:
            logger.error(f"Error loading .env file {env_file}: {e}")

    def _setup_default_configs(self) -> None:
        # Execution
        self.register_config("ABOT_THREADS", 1, int,
                             "Worker threads for topology evaluation and hypermetric search")
        self.register_config("ABOT_OUTPUT_PREFIX", "work", str, "Default output directory")
        self.register_config("ABOT_SEED", 0, int, "Seed for every stochastic choice (local-search restarts)")
        self.register_config("ABOT_QUEUE_TIMEOUT", None, int,
                             "Timeout in seconds for a parallel phase (None blocks)")
        self.register_config("ABOT_LOG_LEVEL", "INFO", str, "Root logging level for CLI runs")

        # Numerical tolerances
        for name, value in DEFAULT_TOLERANCES.items():
            self.register_config(f"{TOLERANCE_PREFIX}{name.upper()}", value, float, f"Tolerance '{name}'")

        # Algorithm budgets
        self.register_config("ABOT_DEFAULT_DEPTH", DEFAULT_APPROX_DEPTH, int,
                             "Dyadic depth for polygonal approximation of convex bodies")
        self.register_config("ABOT_MAX_ITERS", 2000, int, "Iteration cap for Steiner position optimization")

    def register_config(self, key: str, default: Any = None, cast: Callable[[str], Any] = str,
                        description: str = "") -> None:
        """
        Register a configuration key and cache its current value.

        Args:
            key: Environment variable name
            default: Value used when the variable is unset or invalid
            cast: Conversion applied to the raw string (int, float, str, bool)
            description: Human-readable description of the config
        """
        self._registered_keys[key] = ConfigKey(default, cast, description)
        self.config[key] = self._read(key)

    def _read(self, key: str) -> Any:
        entry = self._registered_keys[key]
        raw_value = os.getenv(key)
        if raw_value is None:
            return entry.default
        try:
            if entry.cast is bool:
                return raw_value.strip().lower() in ('true', '1', 'yes', 'on')
            return entry.cast(raw_value.strip())
        except (ValueError, TypeError):
            logger.warning(f"Invalid value for {key}: '{raw_value}'. Using default: {entry.default}")
            return entry.default

    def get(self, key: str, default: Any = None) -> Any:
        """Registered value of `key`, else the raw environment value, else `default`."""
        if key in self.config:
            return self.config[key]
        return os.getenv(key, default)

    def get_tolerances(self) -> Dict[str, float]:
        """Tolerances keyed by short name (geom, axiom, recon, parallel, hypermetric, optimizer)."""
        return {key[len(TOLERANCE_PREFIX):].lower(): value for key, value in self.config.items()
                if key.startswith(TOLERANCE_PREFIX) and value is not None}

    def summary(self) -> str:
        rows = [[key, self.config.get(key), entry.description] for key, entry in self._registered_keys.items()]
        return "Configuration Summary:\n" + tabulate(rows, headers=["Key", "Value", "Description"],
                                                     tablefmt="grid", disable_numparse=True)


# Global configuration manager instance
config = ConfigManager()
