"""Base protocol for run executors."""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Protocol

from expanding_graph_filters.models import RunFailure


@dataclass(frozen=True, eq=False)
class RunTask:
    """One (dataset, learner, realization) unit of work and its payload."""

    dataset: str
    learner: str
    realization: int
    payload: Any = None


class RunExecutor(Protocol):
    """Protocol defining the interface for run executors.

    Implement this to add new execution backends.
    """

    async def run_all(self, tasks: Sequence[RunTask]) -> list[Any | RunFailure]:
        """Run every task.

        Args:
            tasks (Sequence[RunTask]): Runs to execute.

        Returns:
            list[Any | RunFailure]: One outcome or failure per task, in task order.
        """
        ...
