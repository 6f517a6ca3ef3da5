"""Abstract protocol for run-manifest storage backends."""

from typing import Protocol

from expanding_graph_filters.models import Selection
from expanding_graph_filters.state.models import ExperimentState, RunState


class ManifestStore(Protocol):
    """Protocol for experiment-manifest persistence backends."""

    def load(self) -> ExperimentState:
        """Load the manifest from storage."""
        ...

    def save(self, state: ExperimentState) -> None:
        """Persist the manifest to storage."""
        ...

    def start(self, run_id: str, name: str, seed: int | None, config: dict) -> ExperimentState:
        """Record the experiment header."""
        ...

    def get_run(self, dataset: str, learner: str, realization: int) -> RunState:
        """Get state for a specific run."""
        ...

    def update_run(self, run_state: RunState) -> None:
        """Update state for a specific run."""
        ...

    def mark_run_success(
        self,
        dataset: str,
        learner: str,
        realization: int,
        selection: Selection,
        n_steps: int,
        steps_path: str | None = None,
    ) -> None:
        ...

    def mark_run_failure(
        self,
        dataset: str,
        learner: str,
        realization: int,
        error: str,
        diverged_at: int | None = None,
        diverged: bool = False,
    ) -> None:
        ...
