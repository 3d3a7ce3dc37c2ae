# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

# Shared infrastructure for the anisotropic branched transport toolkit

from . import constants
from .config_manager import ConfigManager, config

__all__ = [
    'ConfigManager',
    'config',
    'constants',
]
