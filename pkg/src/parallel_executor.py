# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

import queue
import time
import logging
from typing import Callable, List, Dict, Any, Optional
from threading import Thread
from src.config_manager import config

logger = logging.getLogger(__name__)

# Get timeout values from ConfigManager
QUEUE_TIMEOUT = config.get('ABOT_QUEUE_TIMEOUT')


class TaskQueue(queue.Queue):
    """
    Thread-safe task queue for parallel execution.

    Workers run until stop() enqueues one sentinel per worker.
    """

    def __init__(self, num_workers=1):
        super().__init__()
        self.num_workers = num_workers
        self.threads: List[Thread] = []
        self.start_workers()

    def add_task(self, task, *args, **kwargs):
        self.put((task, args, kwargs))

    def start_workers(self):
        for _ in range(self.num_workers):
            t = Thread(target=self.worker)
            t.daemon = True
            t.start()
            self.threads.append(t)

    def stop(self, wait: bool = True) -> None:
        """
        Let every worker exit and join them when wait is set. Without wait the queued
        tasks that no worker has picked up yet are dropped.
        """
        if not wait:
            while True:
                try:
                    self.get_nowait()
                except queue.Empty:
                    break
                self.task_done()
        for _ in self.threads:
            self.put(None)
        if wait:
            for t in self.threads:
                t.join()

    def worker(self):
        while True:
            entry = self.get()
            if entry is None:
                self.task_done()
                return
            item, args, kwargs = entry
            task_name = item.__name__ if hasattr(item, '__name__') else 'unknown'

            try:
                item(*args, **kwargs)
            except Exception as e:
                # Log exceptions but don't re-raise them; callers collect failures themselves
                logger.error(f"Error in task {task_name}: {str(e)}")
            finally:
                self.task_done()


class ParallelExecutor:
    """
    Runs independent pure computations (topology evaluations, hypermetric chunks) on a
    pool of worker threads. Results are always returned in input order, so callers that
    select by (value, order) get schedule-independent answers.
    """

    def __init__(self, num_workers: int = 1, phase_name: str = "Processing", timeout: Optional[float] = None):
        self.num_workers = max(1, int(num_workers))
        self.phase_name = phase_name
        self.timeout = QUEUE_TIMEOUT if timeout is None else timeout

    def execute_parallel_simple(self,
                               task_func: Callable,
                               items: List[Any],
                               task_args: List[Any] = None,
                               task_kwargs: Dict[str, Any] = None) -> None:
        """
        Execute tasks in parallel without result collection.

        Args:
            task_func: The function to execute for each item
            items: List of items to process
            task_args: Additional positional arguments to pass to task_func
            task_kwargs: Additional keyword arguments to pass to task_func
        """
        logger.debug(f"=== Starting {self.phase_name} Phase ===")

        task_args = task_args or []
        task_kwargs = task_kwargs or {}

        q = TaskQueue(num_workers=self.num_workers)
        for item in items:
            q.add_task(task_func, item, *task_args, **task_kwargs)

        finished = False
        try:
            self._wait_for_completion(q, len(items))
            finished = True
        finally:
            # after a timeout the busy workers exit when their current task returns
            q.stop(wait=finished)
        logger.debug(f"=== {self.phase_name} Phase Complete ===")

    def map_ordered(self, task_func: Callable, items: List[Any]) -> List[Any]:
        """
        Apply task_func to every item and return the results in input order.

        With a single worker the items are processed inline. The first exception (in
        input order) raised by any task is re-raised in the caller.

        Args:
            task_func: Function of one item
            items: Items to process

        Returns:
            List of results, results[i] = task_func(items[i])

        Raises:
            TimeoutError: If the phase exceeds the configured queue timeout
        """
        items = list(items)
        if self.num_workers == 1 or len(items) <= 1:
            return [task_func(item) for item in items]

        results: List[Any] = [None] * len(items)
        errors: List[Optional[BaseException]] = [None] * len(items)

        def run_one(index: int) -> None:
            try:
                results[index] = task_func(items[index])
            except BaseException as e:
                errors[index] = e

        self.execute_parallel_simple(run_one, list(range(len(items))))

        for error in errors:
            if error is not None:
                raise error
        return results

    def _wait_for_completion(self, task_queue: TaskQueue, expected_tasks: int) -> None:
        """
        Wait for all tasks to complete, handling timeouts appropriately.
        """
        # If no timeout is configured, use traditional blocking join
        if self.timeout is None:
            task_queue.join()
            return

        start_time = time.time()
        while task_queue.unfinished_tasks > 0:
            if time.time() - start_time > self.timeout:
                raise TimeoutError(f"{self.phase_name} phase timed out after {self.timeout}s with "
                                   f"{task_queue.unfinished_tasks} of {expected_tasks} tasks unfinished")
            time.sleep(0.01)
