# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""Run logging for the batch front-end: stdout/stderr and library log records go to <out>/run.log."""

import logging
import os
import sys
from typing import Any, Optional, TextIO

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
LOG_FILENAME = "run.log"

_handler: Optional[logging.Handler] = None


class TeeOutput:
    """Writes to a log file and to the stream it replaces."""

    def __init__(self, file_path: str, original_stream: TextIO):
        self.original_stream = original_stream
        self.log_file = None
        try:
            os.makedirs(os.path.dirname(file_path) or ".", exist_ok=True)
            self.log_file = open(file_path, 'a', encoding='utf-8')
        except OSError as e:
            print(f"Warning: Could not open log file {file_path}: {e}", file=original_stream)

    def write(self, text: str) -> int:
        result = self.original_stream.write(text)
        self.original_stream.flush()
        if self.log_file:
            try:
                self.log_file.write(text)
                self.log_file.flush()
            except (OSError, ValueError):
                pass
        return result

    def flush(self) -> None:
        self.original_stream.flush()
        if self.log_file:
            try:
                self.log_file.flush()
            except (OSError, ValueError):
                pass

    def close(self) -> None:
        if self.log_file:
            try:
                self.log_file.close()
            except OSError:
                pass
            self.log_file = None

    def __getattr__(self, name: str) -> Any:
        return getattr(self.original_stream, name)


def setup_logging(prefix: str, level: str = "INFO") -> None:
    """
    Tee stdout and stderr into <prefix>/run.log and route log records to stderr.

    Args:
        prefix: Output directory of the run
        level: Root logging level name
    """
    global _handler
    log_path = os.path.join(prefix, LOG_FILENAME)

    sys.stdout = TeeOutput(log_path, sys.stdout)
    sys.stderr = TeeOutput(log_path, sys.stderr)

    root = logging.getLogger()
    if _handler is not None:
        root.removeHandler(_handler)
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(_handler)
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))


def cleanup_logging() -> None:
    """Close the run log, detach the handler and restore the original streams."""
    global _handler
    if _handler is not None:
        logging.getLogger().removeHandler(_handler)
        _handler = None

    if isinstance(sys.stdout, TeeOutput):
        sys.stdout.close()
        sys.stdout = sys.stdout.original_stream

    if isinstance(sys.stderr, TeeOutput):
        sys.stderr.close()
        sys.stderr = sys.stderr.original_stream
