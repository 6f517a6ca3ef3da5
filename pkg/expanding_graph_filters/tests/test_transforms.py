"""Tests for result-table transforms."""

import numpy as np
import pytest

from expanding_graph_filters.models import RunFailure, RunResult, Selection, StepRecord
from expanding_graph_filters.transforms import (
    STEP_COLUMNS,
    cumulative_regret_frame,
    get_run_path,
    regret_table,
    runs_frame,
    steps_frame,
    summary_table,
    sweep_frame,
)


def _result(learner: str, realization: int, test_nrmse: float, regret: float = 0.0) -> RunResult:
    return RunResult(
        dataset="filter",
        learner=learner,
        realization=realization,
        selection=Selection(eta=1e-3, mu=0.0, order=3),
        n_steps=10,
        train_nrmse=0.1,
        test_nrmse=test_nrmse,
        normalized_regret=regret,
    )


def test_steps_frame():
    """Test step records become the step table."""
    records = [
        StepRecord(time=t, prediction=0.1 * t, truth=0.2 * t, loss_value=0.01, grad_norm=1.0, filter_after=[3.0, 4.0])
        for t in (1, 2, 3)
    ]

    df = steps_frame(records)

    assert df.columns == STEP_COLUMNS
    assert df["t"].to_list() == [1, 2, 3]
    assert df["filter_norm"].to_list() == pytest.approx([5.0, 5.0, 5.0])


def test_summary_excludes_failures():
    """Failed runs are counted but excluded from the means."""
    runs = [_result("dogf", 0, 0.02), _result("dogf", 1, 0.04), _result("sogf", 0, 0.2)]
    failed = [RunFailure(dataset="filter", learner="sogf", realization=1, error="boom", status="diverged")]

    runs_df = runs_frame(runs, failed, {"filter": 8})
    summary = summary_table(runs_df)

    dogf = summary.filter(summary["learner"] == "dogf").row(0, named=True)
    sogf = summary.filter(summary["learner"] == "sogf").row(0, named=True)
    assert dogf["mean_nrmse"] == pytest.approx(0.03)
    assert dogf["std_nrmse"] == pytest.approx(0.01)
    assert dogf["runs"] == 2 and dogf["diverged"] == 0
    assert sogf["mean_nrmse"] == pytest.approx(0.2)
    assert sogf["runs"] == 1 and sogf["diverged"] == 1
    assert runs_df["split_index"].to_list() == [8, 8, 8, 8]


def test_tables_are_sorted():
    """Aggregation order does not depend on completion order."""
    runs = [_result("sogf", 1, 0.3, 2.0), _result("dogf", 0, 0.1, 1.0), _result("sogf", 0, 0.2, 4.0)]

    runs_df = runs_frame(runs, [], {})
    regret = regret_table(runs_df)

    assert runs_df["learner"].to_list() == ["dogf", "sogf", "sogf"]
    assert runs_df["realization"].to_list() == [0, 0, 1]
    assert regret["learner"].to_list() == ["dogf", "sogf"]
    assert regret["mean_regret"].to_list() == pytest.approx([1.0, 3.0])


def test_cumulative_regret_frame():
    """Series are stored in long format with t starting at 1."""
    df = cumulative_regret_frame("filter", "adaogf", 2, np.array([0.5, 0.25]))
    assert df["t"].to_list() == [1, 2]
    assert df["realization"].to_list() == [2, 2]
    assert df["normalized_regret"].to_list() == [0.5, 0.25]


def test_sweep_frame_renames_value():
    """The swept column is named after the hyperparameter."""
    rows = [
        {"dataset": "filter", "learner": "dogf", "realization": 0, "value": 0.1, "test_nrmse": None, "status": "diverged"},
        {"dataset": "filter", "learner": "dogf", "realization": 0, "value": 0.01, "test_nrmse": 0.03, "status": "ok"},
    ]
    df = sweep_frame(rows, "eta")
    assert df["eta"].to_list() == [0.01, 0.1]
    assert df["test_nrmse"].to_list() == [0.03, None]
    assert sweep_frame([], "order").columns[3] == "order"


def test_get_run_path():
    """Test per-run path layout."""
    assert get_run_path("filter", "dogf", 3) == "runs/filter/dogf/realization_3/steps.csv"
    assert get_run_path("filter", "dogf", 3, "audit.csv").endswith("realization_3/audit.csv")
