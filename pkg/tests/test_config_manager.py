# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

import argparse
import logging

import pytest

from src.argparse_common import parse_grid, parse_sweep, parse_tol, resolve_tolerances
from src.config_manager import ConfigManager
from src.constants import DEFAULT_TOLERANCES


# ---- ConfigManager ----

def test_defaults(monkeypatch):
    monkeypatch.delenv("ABOT_THREADS", raising=False)
    cfg = ConfigManager(env_file=None)
    assert cfg.get("ABOT_THREADS") == 1
    assert cfg.get("ABOT_OUTPUT_PREFIX") == "work"
    assert cfg.get("UNREGISTERED_KEY", "x") == "x"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("ABOT_THREADS", "4")
    monkeypatch.setenv("ABOT_TOL_GEOM", "1e-6")
    cfg = ConfigManager(env_file=None)
    assert cfg.get("ABOT_THREADS") == 4
    tolerances = cfg.get_tolerances()
    assert set(tolerances) == set(DEFAULT_TOLERANCES)
    assert tolerances['geom'] == 1e-6


def test_invalid_value_falls_back(monkeypatch, caplog):
    monkeypatch.setenv("ABOT_THREADS", "many")
    with caplog.at_level(logging.WARNING):
        cfg = ConfigManager(env_file=None)
    assert cfg.get("ABOT_THREADS") == 1
    assert "Invalid value for ABOT_THREADS" in caplog.text


def test_env_file_does_not_override_environment(tmp_path, monkeypatch):
    env = tmp_path / ".env"
    env.write_text("ABOT_SEED=7\nABOT_MAX_ITERS=50\n")
    monkeypatch.setenv("ABOT_SEED", "3")
    # registered so monkeypatch restores the variable the .env file sets
    monkeypatch.setenv("ABOT_MAX_ITERS", "")
    monkeypatch.delenv("ABOT_MAX_ITERS")
    cfg = ConfigManager(env_file=str(env))
    assert cfg.get("ABOT_SEED") == 3
    assert cfg.get("ABOT_MAX_ITERS") == 50


def test_summary_lists_keys():
    text = ConfigManager(env_file=None).summary()
    assert "ABOT_THREADS" in text
    assert "ABOT_TOL_OPTIMIZER" in text


# ---- argument parsers ----

def test_parse_tol():
    assert parse_tol("GEOM=1e-6") == ('geom', 1e-6)
    for bad in ("geom", "speed=1", "geom=x", "geom=0"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_tol(bad)


def test_parse_sweep():
    assert parse_sweep("h=0.5:1.5:0.5") == ('h', [0.5, 1.0, 1.5])
    assert parse_sweep("h=0:0.3:0.1") == ('h', [0.0, 0.1, 0.2, 0.3])
    assert parse_sweep("h=1:1:1") == ('h', [1.0])
    for bad in ("h=1:2", "=1:2:1", "h=2:1:1", "h=0:1:0", "h=a:b:c"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_sweep(bad)


def test_parse_grid():
    assert parse_grid("5x5") == (5, 5)
    assert parse_grid("3X4") == (3, 4)
    for bad in ("5", "0x3", "axb"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_grid(bad)


def test_resolve_tolerances_applies_overrides():
    tolerances = resolve_tolerances([('optimizer', 1e-4)])
    assert tolerances['optimizer'] == 1e-4
    assert set(tolerances) == set(DEFAULT_TOLERANCES)
