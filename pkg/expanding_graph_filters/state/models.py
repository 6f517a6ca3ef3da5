"""State models for tracking runs of an experiment."""

from datetime import datetime, timezone
from typing import Literal

from pydantic import BaseModel, Field

from expanding_graph_filters.models import Selection


def _now() -> datetime:
    return datetime.now(timezone.utc)


class RunState(BaseModel):
    """Track one (dataset, learner, realization) run."""

    dataset: str
    learner: str
    realization: int

    # Status tracking
    last_update: datetime = Field(default_factory=_now)
    status: Literal["pending", "success", "failure", "diverged"] = "pending"
    error: str | None = None
    diverged_at: int | None = None

    # Outcome tracking
    selection: Selection | None = None
    n_steps: int = 0
    steps_path: str | None = None

    @property
    def key(self) -> str:
        return run_key(self.dataset, self.learner, self.realization)

    def is_done(self) -> bool:
        """True once the run finished successfully."""
        return self.status == "success"

    def mark_success(self, selection: Selection, n_steps: int, steps_path: str | None = None) -> None:
        """Mark a run as successful."""
        self.last_update = _now()
        self.status = "success"
        self.error = None
        self.diverged_at = None
        self.selection = selection
        self.n_steps = n_steps
        self.steps_path = steps_path

    def mark_failure(self, error: str, diverged_at: int | None = None, diverged: bool = False) -> None:
        """Mark a run as failed (or diverged)."""
        self.last_update = _now()
        self.status = "diverged" if diverged else "failure"
        self.error = error
        self.diverged_at = diverged_at
        self.n_steps = 0


def run_key(dataset: str, learner: str, realization: int) -> str:
    return f"{dataset}:{learner}:{realization}"


class ExperimentState(BaseModel):
    """Root manifest document: configuration echo, seed and every run's status."""

    version: str = "1.0"
    run_id: str | None = None
    name: str = "experiment"
    seed: int | None = None
    config: dict = Field(default_factory=dict)
    last_updated: datetime = Field(default_factory=_now)
    runs: dict[str, RunState] = Field(default_factory=dict)

    def get_run(self, dataset: str, learner: str, realization: int) -> RunState:
        """Get or create state for a run."""
        key = run_key(dataset, learner, realization)
        if key not in self.runs:
            self.runs[key] = RunState(dataset=dataset, learner=learner, realization=realization)
        return self.runs[key]

    def update_last_modified(self) -> None:
        """Update the last modified timestamp."""
        self.last_updated = _now()
