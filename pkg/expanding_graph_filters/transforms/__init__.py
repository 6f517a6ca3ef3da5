"""Transforms package."""

from .transform import (
    STEP_COLUMNS,
    audit_frame,
    cumulative_regret_frame,
    get_run_path,
    regret_table,
    runs_frame,
    steps_frame,
    summary_table,
    sweep_frame,
)

__all__ = [
    "STEP_COLUMNS",
    "audit_frame",
    "cumulative_regret_frame",
    "get_run_path",
    "regret_table",
    "runs_frame",
    "steps_frame",
    "summary_table",
    "sweep_frame",
]
