"""Tests for record schemas and the error hierarchy."""

import pytest
from pydantic import ValidationError

from expanding_graph_filters.models import (
    AuditReport,
    ConfigurationError,
    DimensionError,
    DivergenceError,
    EmptyStreamError,
    GraphFilterError,
    RunFailure,
    Selection,
    StepRecord,
    StreamParseError,
    StreamSchemaError,
)


def test_step_record_filter_norm():
    """Filter norm is the Euclidean norm of the filter after the step."""
    record = StepRecord(time=1, prediction=0.5, truth=1.0, loss_value=0.125, grad_norm=0.2, filter_after=[3.0, 4.0])
    assert record.filter_norm == pytest.approx(5.0)


def test_step_record_rejects_negative_loss():
    """Squared losses are nonnegative."""
    with pytest.raises(ValidationError):
        StepRecord(time=1, prediction=0.0, truth=0.0, loss_value=-1.0, grad_norm=0.0, filter_after=[0.0])


def test_run_failure_defaults():
    """A failure without a status is a plain failure."""
    failure = RunFailure(dataset="filter", learner="sogf", realization=2, error="boom")
    assert failure.status == "failed"
    assert failure.step is None


def test_audit_report_passed():
    """An audit passes exactly when no step violates the bound."""
    report = AuditReport(learner="dogf", bound="deterministic", realization=0, n_steps=10, min_slack=0.1)
    assert report.passed
    assert not report.model_copy(update={"violations": 1}).passed


def test_selection_round_trip():
    """Selections serialize to plain JSON values."""
    selection = Selection(eta=1e-3, mu=0.0, order=3, train_nrmse=0.02)
    assert Selection(**selection.model_dump(mode="json")) == selection


def test_error_hierarchy():
    """Package errors share a base class and keep their builtin families."""
    assert issubclass(DimensionError, ValueError)
    assert issubclass(ConfigurationError, GraphFilterError)
    assert issubclass(DivergenceError, ArithmeticError)
    assert issubclass(EmptyStreamError, StreamSchemaError)

    error = DivergenceError("exploded", step=7)
    assert error.step == 7


def test_stream_parse_error_location():
    """Parse errors carry file and line."""
    error = StreamParseError("Not a number: 'x'", path="stream.csv", line=4)
    assert str(error).startswith("stream.csv:4: ")
    assert error.line == 4
