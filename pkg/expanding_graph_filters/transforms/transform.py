"""Turn step records and run outcomes into result tables."""

import logging

import numpy as np
import polars as pl

from expanding_graph_filters.models import AuditReport, RunFailure, RunResult, StepRecord

logger = logging.getLogger(__name__)

STEP_COLUMNS = ["t", "prediction", "truth", "loss", "grad_norm", "filter_norm"]
RUN_COLUMNS = {
    "dataset": pl.Utf8,
    "learner": pl.Utf8,
    "realization": pl.Int64,
    "status": pl.Utf8,
    "eta": pl.Float64,
    "mu": pl.Float64,
    "order": pl.Int64,
    "n_steps": pl.Int64,
    "split_index": pl.Int64,
    "train_nrmse": pl.Float64,
    "test_nrmse": pl.Float64,
    "normalized_regret": pl.Float64,
    "steps_path": pl.Utf8,
    "error": pl.Utf8,
}
SWEEP_COLUMNS = {
    "dataset": pl.Utf8,
    "learner": pl.Utf8,
    "realization": pl.Int64,
    "value": pl.Float64,
    "test_nrmse": pl.Float64,
    "status": pl.Utf8,
}


def steps_frame(records: list[StepRecord]) -> pl.DataFrame:
    """One row per online step: ``t,prediction,truth,loss,grad_norm,filter_norm``.

    Args:
        records (list[StepRecord]): Step records of one run

    Returns:
        pl.DataFrame: Step table in time order.
    """
    logger.debug(f"Building step table from {len(records)} records")
    return pl.DataFrame(
        {
            "t": [r.time for r in records],
            "prediction": [r.prediction for r in records],
            "truth": [r.truth for r in records],
            "loss": [r.loss_value for r in records],
            "grad_norm": [r.grad_norm for r in records],
            "filter_norm": [r.filter_norm for r in records],
        },
        schema={"t": pl.Int64, **{c: pl.Float64 for c in STEP_COLUMNS[1:]}},
    )


def runs_frame(runs: list[RunResult], failed: list[RunFailure], split_index: dict[str, int]) -> pl.DataFrame:
    """Every run, successful or not, sorted by dataset, learner and realization.

    ``split_index`` maps a dataset name to its number of training arrivals.
    """
    rows = [
        {
            "dataset": r.dataset,
            "learner": r.learner,
            "realization": r.realization,
            "status": r.status,
            "eta": r.selection.eta,
            "mu": r.selection.mu,
            "order": r.selection.order,
            "n_steps": r.n_steps,
            "split_index": split_index.get(r.dataset),
            "train_nrmse": r.train_nrmse,
            "test_nrmse": r.test_nrmse,
            "normalized_regret": r.normalized_regret,
            "steps_path": r.steps_path,
            "error": None,
        }
        for r in runs
    ]
    rows += [
        {
            "dataset": f.dataset,
            "learner": f.learner,
            "realization": f.realization,
            "status": f.status,
            "split_index": split_index.get(f.dataset),
            "error": f.error,
        }
        for f in failed
    ]
    df = pl.DataFrame(rows, schema=RUN_COLUMNS) if rows else pl.DataFrame(schema=RUN_COLUMNS)
    return df.sort(["dataset", "learner", "realization"])


def summary_table(runs_df: pl.DataFrame) -> pl.DataFrame:
    """Mean and standard deviation of test NRMSE per dataset and learner.

    Failed and diverged runs are excluded from the statistics and counted.
    """
    ok = pl.col("status") == "ok"
    return (
        runs_df.group_by(["dataset", "learner"])
        .agg(
            pl.col("test_nrmse").filter(ok).mean().alias("mean_nrmse"),
            pl.col("test_nrmse").filter(ok).std(ddof=0).alias("std_nrmse"),
            ok.sum().cast(pl.Int64).alias("runs"),
            (~ok).sum().cast(pl.Int64).alias("diverged"),
        )
        .sort(["dataset", "learner"])
    )


def regret_table(runs_df: pl.DataFrame) -> pl.DataFrame:
    """Mean normalized train regret per dataset and learner."""
    ok = pl.col("status") == "ok"
    return (
        runs_df.group_by(["dataset", "learner"])
        .agg(
            pl.col("normalized_regret").filter(ok).mean().alias("mean_regret"),
            pl.col("normalized_regret").filter(ok).std(ddof=0).alias("std_regret"),
            ok.sum().cast(pl.Int64).alias("runs"),
        )
        .sort(["dataset", "learner"])
    )


def cumulative_regret_frame(dataset: str, learner: str, realization: int, normalized: np.ndarray) -> pl.DataFrame:
    """Normalized cumulative regret series of one run in long format."""
    n = int(np.asarray(normalized).size)
    return pl.DataFrame(
        {
            "dataset": [dataset] * n,
            "learner": [learner] * n,
            "realization": [realization] * n,
            "t": np.arange(1, n + 1),
            "normalized_regret": np.asarray(normalized, dtype=np.float64),
        },
        schema={
            "dataset": pl.Utf8,
            "learner": pl.Utf8,
            "realization": pl.Int64,
            "t": pl.Int64,
            "normalized_regret": pl.Float64,
        },
    )


def sweep_frame(rows: list[dict], value_name: str) -> pl.DataFrame:
    """Sensitivity sweep rows (``value`` is the swept hyperparameter), sorted."""
    df = pl.DataFrame(rows, schema=SWEEP_COLUMNS) if rows else pl.DataFrame(schema=SWEEP_COLUMNS)
    return df.sort(["dataset", "learner", "realization", "value"]).rename({"value": value_name})


def audit_frame(reports: list[AuditReport]) -> pl.DataFrame:
    """One row per audited run."""
    schema = {
        "learner": pl.Utf8,
        "bound": pl.Utf8,
        "realization": pl.Int64,
        "n_steps": pl.Int64,
        "min_slack": pl.Float64,
        "violations": pl.Int64,
        "worst_step": pl.Int64,
        "comparator_in_ball": pl.Boolean,
        "path": pl.Utf8,
    }
    rows = [r.model_dump() for r in reports]
    df = pl.DataFrame(rows, schema=schema) if rows else pl.DataFrame(schema=schema)
    return df.sort(["learner", "realization"])


def get_run_path(dataset: str, learner: str, realization: int, filename: str = "steps.csv") -> str:
    """Relative path of a per-run file.

    Format: runs/{dataset}/{learner}/realization_{r}/{filename}
    """
    return f"runs/{dataset}/{learner}/realization_{realization}/{filename}"
