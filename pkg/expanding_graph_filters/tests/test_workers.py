"""Tests for the bounded run pool."""

import asyncio
import threading
import time

from expanding_graph_filters.models import DivergenceError, RunFailure
from expanding_graph_filters.workers import AsyncRunPool, RunTask


def _tasks(n: int) -> list[RunTask]:
    return [RunTask(dataset="d", learner="dogf", realization=r, payload=r) for r in range(n)]


def test_results_keep_task_order():
    """Outcomes line up with their tasks regardless of completion order."""

    def run(task):
        time.sleep(0.01 * (5 - task.payload))
        return task.payload * 10

    results = asyncio.run(AsyncRunPool(run, max_workers=5).run_all(_tasks(5)))
    assert results == [0, 10, 20, 30, 40]


def test_failures_become_records():
    """Divergence keeps its step; other errors keep their type."""

    def run(task):
        if task.payload == 1:
            raise DivergenceError("prediction exploded", step=17)
        if task.payload == 2:
            raise ValueError("bad grid")
        return "ok"

    results = asyncio.run(AsyncRunPool(run, max_workers=2).run_all(_tasks(3)))

    assert results[0] == "ok"
    assert isinstance(results[1], RunFailure)
    assert results[1].status == "diverged"
    assert results[1].step == 17
    assert results[2].status == "failed"
    assert results[2].error == "ValueError: bad grid"
    assert results[2].realization == 2


def test_concurrency_is_bounded():
    """No more than max_workers runs are in flight at once."""
    lock = threading.Lock()
    active = 0
    peak = 0

    def run(task):
        nonlocal active, peak
        with lock:
            active += 1
            peak = max(peak, active)
        time.sleep(0.02)
        with lock:
            active -= 1
        return task.realization

    results = asyncio.run(AsyncRunPool(run, max_workers=2).run_all(_tasks(8)))

    assert results == list(range(8))
    assert 1 <= peak <= 2
