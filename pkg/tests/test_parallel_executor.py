# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

import threading
import time

import pytest

from src.parallel_executor import ParallelExecutor


def slow_square(x):
    # later items finish first
    time.sleep(0.001 * (10 - x))
    return x * x


@pytest.mark.parametrize("workers", [1, 4])
def test_map_ordered_keeps_input_order(workers):
    executor = ParallelExecutor(num_workers=workers, phase_name="Squares")
    assert executor.map_ordered(slow_square, range(10)) == [x * x for x in range(10)]


def test_map_ordered_uses_worker_threads():
    seen = set()
    lock = threading.Lock()

    def record(x):
        with lock:
            seen.add(threading.get_ident())
        return x

    ParallelExecutor(num_workers=3).map_ordered(record, range(6))
    assert threading.get_ident() not in seen


def test_first_error_is_raised():
    def fail_on_odd(x):
        if x % 2:
            raise ValueError(f"odd {x}")
        return x

    with pytest.raises(ValueError, match="odd 1"):
        ParallelExecutor(num_workers=4).map_ordered(fail_on_odd, range(8))
    with pytest.raises(ValueError, match="odd 1"):
        ParallelExecutor(num_workers=1).map_ordered(fail_on_odd, range(8))


def test_empty_input():
    assert ParallelExecutor(num_workers=4).map_ordered(slow_square, []) == []


def test_workers_exit_after_each_call():
    before = threading.active_count()
    executor = ParallelExecutor(num_workers=4, phase_name="Squares")
    for _ in range(5):
        executor.map_ordered(slow_square, range(10))
    assert threading.active_count() == before


def test_workers_exit_after_a_failed_call():
    def fail(x):
        raise ValueError(x)

    before = threading.active_count()
    with pytest.raises(ValueError):
        ParallelExecutor(num_workers=3).map_ordered(fail, range(6))
    assert threading.active_count() == before


def test_timeout_drops_pending_tasks():
    started = []

    def sleepy(x):
        started.append(x)
        time.sleep(0.3)

    before = threading.active_count()
    with pytest.raises(TimeoutError):
        ParallelExecutor(num_workers=2, timeout=0.05).map_ordered(sleepy, range(20))
    time.sleep(0.6)
    assert len(started) == 2
    assert threading.active_count() == before
