"""Online graph-filter learning over expanding graphs."""

from expanding_graph_filters.config_handler import load_config_yml
from expanding_graph_filters.pipeline import generate_dataset, report, run_experiment, validate_bounds

__all__ = [
    "generate_dataset",
    "load_config_yml",
    "report",
    "run_experiment",
    "validate_bounds",
]
