"""Bounded asynchronous pool running independent learner runs in worker threads."""

import asyncio
import logging
from collections.abc import Callable, Sequence
from typing import Generic, TypeVar

from expanding_graph_filters.models import DivergenceError, RunFailure
from expanding_graph_filters.workers.base import RunTask

logger = logging.getLogger(__name__)

T = TypeVar("T")


class AsyncRunPool(Generic[T]):
    """Run tasks concurrently with at most ``max_workers`` in flight.

    Implements the RunExecutor protocol. A task that raises becomes a
    :class:`RunFailure` instead of propagating.
    """

    def __init__(self, run_fn: Callable[[RunTask], T], max_workers: int = 4):
        self.run_fn = run_fn
        self.max_workers = max_workers
        self._semaphore = asyncio.Semaphore(max_workers)

    async def _run_with_semaphore(self, task: RunTask) -> T | RunFailure:
        """Run one task with concurrency limiting and error handling."""
        async with self._semaphore:
            try:
                return await asyncio.to_thread(self.run_fn, task)
            except DivergenceError as e:
                logger.error(f"Run {task.dataset}/{task.learner}/{task.realization} diverged: {e}")
                return RunFailure(
                    dataset=task.dataset,
                    learner=task.learner,
                    realization=task.realization,
                    error=str(e),
                    status="diverged",
                    step=e.step,
                )
            except Exception as e:
                logger.error(f"Run {task.dataset}/{task.learner}/{task.realization} failed: {e}")
                return RunFailure(
                    dataset=task.dataset,
                    learner=task.learner,
                    realization=task.realization,
                    error=f"{type(e).__name__}: {e}",
                )

    async def run_all(self, tasks: Sequence[RunTask]) -> list[T | RunFailure]:
        """Run every task; results come back in task order."""
        logger.info(f"Running {len(tasks)} runs with up to {self.max_workers} workers")
        results = await asyncio.gather(*(self._run_with_semaphore(task) for task in tasks))
        return list(results)
