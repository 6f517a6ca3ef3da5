"""JSON file-based run-manifest store."""

import json
import logging
from pathlib import Path

from pydantic import ValidationError

from expanding_graph_filters.models import Selection
from expanding_graph_filters.state.models import ExperimentState, RunState

logger = logging.getLogger(__name__)


class JsonManifestStore:
    """JSON file-based manifest persistence."""

    def __init__(self, manifest_file: str | Path = "results/manifest.json"):
        """Initialize manifest store.

        Args:
            manifest_file: Path to JSON manifest file
        """
        self.manifest_file = Path(manifest_file)
        self._state: ExperimentState | None = None

    def load(self) -> ExperimentState:
        """Load the manifest from JSON, create empty if not found."""
        if self._state is not None:
            return self._state

        if not self.manifest_file.exists():
            logger.debug(f"Manifest not found at {self.manifest_file}, creating new")
            self._state = ExperimentState()
            return self._state

        try:
            with open(self.manifest_file, "r") as f:
                data = json.load(f)
            self._state = ExperimentState(**data)
            logger.debug(f"Loaded manifest from {self.manifest_file}")
            return self._state
        except (json.JSONDecodeError, ValidationError) as e:
            logger.warning(f"Failed to load manifest from {self.manifest_file}: {e}, creating new")
            self._state = ExperimentState()
            return self._state

    def save(self, state: ExperimentState) -> None:
        """Persist the manifest to JSON."""
        self.manifest_file.parent.mkdir(parents=True, exist_ok=True)

        with open(self.manifest_file, "w") as f:
            json.dump(state.model_dump(mode="json"), f, indent=2, sort_keys=True)

        logger.debug(f"Saved manifest to {self.manifest_file}")
        self._state = state

    def start(self, run_id: str, name: str, seed: int | None, config: dict) -> ExperimentState:
        """Record the experiment header and persist it."""
        state = self.load()
        state.run_id = run_id
        state.name = name
        state.seed = seed
        state.config = config
        state.update_last_modified()
        self.save(state)
        return state

    def get_run(self, dataset: str, learner: str, realization: int) -> RunState:
        """Get run state, creating if needed."""
        return self.load().get_run(dataset, learner, realization)

    def update_run(self, run_state: RunState) -> None:
        """Update run state and persist."""
        state = self.load()
        state.runs[run_state.key] = run_state
        state.update_last_modified()
        self.save(state)

    def mark_run_success(
        self,
        dataset: str,
        learner: str,
        realization: int,
        selection: Selection,
        n_steps: int,
        steps_path: str | None = None,
    ) -> None:
        """Mark a run as successful."""
        run_state = self.get_run(dataset, learner, realization)
        run_state.mark_success(selection, n_steps, steps_path)
        self.update_run(run_state)

    def mark_run_failure(
        self,
        dataset: str,
        learner: str,
        realization: int,
        error: str,
        diverged_at: int | None = None,
        diverged: bool = False,
    ) -> None:
        """Mark a run as failed."""
        run_state = self.get_run(dataset, learner, realization)
        run_state.mark_failure(error, diverged_at, diverged)
        self.update_run(run_state)
