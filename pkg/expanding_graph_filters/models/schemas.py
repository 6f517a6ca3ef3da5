"""Pydantic models for step records, run outcomes and experiment results."""

from datetime import datetime
from typing import Literal

from pydantic import BaseModel, Field


# Step Records
class StepRecord(BaseModel):
    """One online step: prediction at the incoming node and the resulting filter."""
    time: int
    prediction: float
    truth: float
    loss_value: float = Field(ge=0.0)
    grad_norm: float = Field(ge=0.0)
    filter_after: list[float]

    @property
    def filter_norm(self) -> float:
        return sum(v * v for v in self.filter_after) ** 0.5


# Hyperparameters chosen for a run
class Selection(BaseModel):
    """Hyperparameters locked on the train prefix."""
    eta: float
    mu: float
    order: int
    train_nrmse: float | None = None


# Run Results
class RunResult(BaseModel):
    """Result of one (dataset, learner, realization) run."""
    dataset: str
    learner: str
    realization: int
    selection: Selection
    steps_path: str | None = None
    n_steps: int
    train_nrmse: float
    test_nrmse: float
    normalized_regret: float
    status: Literal["ok"] = "ok"


class RunFailure(BaseModel):
    """Run that diverged or raised; kept in results and excluded from means."""
    dataset: str
    learner: str
    realization: int
    error: str
    status: Literal["diverged", "failed"] = "failed"
    step: int | None = None


# Write Results
class WriteResult(BaseModel):
    """Result from writing a table to storage."""
    path: str
    records_written: int
    format: str = "csv"


# Bound Audit
class AuditReport(BaseModel):
    """Outcome of checking normalized regret against an analytic bound."""
    learner: str
    bound: Literal["deterministic", "stochastic", "adaptive"]
    realization: int
    n_steps: int
    min_slack: float
    violations: int = 0
    worst_step: int | None = None
    comparator_in_ball: bool = True
    path: str | None = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


# Pipeline Results
class ExperimentResult(BaseModel):
    """Result from an experiment, audit or report invocation."""
    success: bool
    run_id: str
    run_start: datetime
    run_end: datetime
    output_dir: str
    runs: list[RunResult] = Field(default_factory=list)
    failed: list[RunFailure] = Field(default_factory=list)
    audits: list[AuditReport] = Field(default_factory=list)
    files: list[WriteResult] = Field(default_factory=list)
    error: str | None = None
