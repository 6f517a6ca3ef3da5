"""State management package for tracking experiment runs."""

from expanding_graph_filters.state.json_store import JsonManifestStore
from expanding_graph_filters.state.models import ExperimentState, RunState, run_key
from expanding_graph_filters.state.store import ManifestStore

__all__ = [
    "JsonManifestStore",
    "ManifestStore",
    "ExperimentState",
    "RunState",
    "run_key",
]
