"""Online graph-filter learners: one projected gradient step per arriving node."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from expanding_graph_filters.attachment import (
    EnsembleAttachment,
    StochasticAttachment,
    compose_ensemble,
    project_simplex,
)
from expanding_graph_filters.graph import AttachmentVector, ShiftMatrix
from expanding_graph_filters.learners.losses import (
    GradientForm,
    grad_ada_h,
    grad_ada_m,
    grad_ada_n,
    grad_det,
    grad_stoch,
    loss_det,
    loss_stoch,
    mean_design_row,
)
from expanding_graph_filters.learners.projections import project_ball
from expanding_graph_filters.models import DivergenceError, StepRecord

logger = logging.getLogger(__name__)

PREDICTION_LIMIT = 1e12


class HyperParams(BaseModel):
    """Learning rate, regularization, filter order and filter-energy radius."""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(ge=0.0)
    mu: float = Field(default=0.0, ge=0.0)
    order: int = Field(ge=1)
    ball_radius: float = Field(default=math.inf, gt=0.0)


@dataclass(frozen=True, eq=False)
class LearnerState:
    """Filter ``h`` after ``time`` steps, plus the combiners of adaptive learners."""

    h: np.ndarray
    time: int = 0
    m: np.ndarray | None = None
    n: np.ndarray | None = None

    @classmethod
    def initial(cls, h0: np.ndarray, rule_count: int | None = None) -> LearnerState:
        h0 = np.array(h0, dtype=np.float64)
        if rule_count is None:
            return cls(h=h0)
        uniform = np.full(rule_count, 1.0 / rule_count)
        return cls(h=h0, m=uniform, n=uniform.copy())


class StepOutcome(NamedTuple):
    prediction: float
    record: StepRecord
    state: LearnerState


def check_prediction(prediction: float, step: int) -> float:
    """Abort a run whose prediction is non-finite or exploding."""
    if not math.isfinite(prediction) or abs(prediction) > PREDICTION_LIMIT:
        logger.error(f"Prediction {prediction} at step {step} exceeds the divergence guard")
        raise DivergenceError(f"Prediction {prediction} at step {step} diverged", step=step)
    return prediction


def _record(step: int, prediction: float, truth: float, loss: float, grad: np.ndarray, h: np.ndarray) -> StepRecord:
    if not np.all(np.isfinite(h)):
        raise DivergenceError(f"Filter became non-finite at step {step}", step=step)
    return StepRecord(
        time=step,
        prediction=prediction,
        truth=truth,
        loss_value=loss,
        grad_norm=float(np.linalg.norm(grad)),
        filter_after=h.tolist(),
    )


def dogf_step(
    state: LearnerState, a_t: AttachmentVector, sm: ShiftMatrix, x_t: float, hp: HyperParams
) -> StepOutcome:
    """Deterministic step: the attachment is known before predicting."""
    step = state.time + 1
    h = state.h
    prediction = check_prediction(float(sm.project(a_t) @ h), step)
    loss = loss_det(a_t, sm, h, x_t, hp.mu)
    grad = grad_det(a_t, sm, h, x_t, hp.mu)
    h_new = project_ball(h - hp.eta * grad, hp.ball_radius)
    record = _record(step, prediction, x_t, loss, grad, h_new)
    return StepOutcome(prediction, record, dataclasses.replace(state, h=h_new, time=step))


def sogf_step(
    state: LearnerState, sa: StochasticAttachment, sm: ShiftMatrix, x_t: float, hp: HyperParams
) -> StepOutcome:
    """Stochastic step: predict with the expected attachment, descend the expected loss."""
    step = state.time + 1
    h = state.h
    prediction = check_prediction(float(mean_design_row(sa, sm) @ h), step)
    loss = loss_stoch(sa, sm, h, x_t, hp.mu).total
    grad = grad_stoch(sa, sm, h, x_t, hp.mu)
    h_new = project_ball(h - hp.eta * grad, hp.ball_radius)
    record = _record(step, prediction, x_t, loss, grad, h_new)
    return StepOutcome(prediction, record, dataclasses.replace(state, h=h_new, time=step))


def pcogf_step(
    state: LearnerState,
    sa: StochasticAttachment,
    a_t: AttachmentVector,
    sm: ShiftMatrix,
    x_t: float,
    hp: HyperParams,
) -> StepOutcome:
    """Prediction-correction step.

    A stochastic step produces the prediction; once ``a_t`` is revealed one
    deterministic step corrects the filter, starting from the predicted filter.
    """
    predicted = sogf_step(state, sa, sm, x_t, hp)
    h_pred = predicted.state.h
    correction = grad_det(a_t, sm, h_pred, x_t, hp.mu)
    h_new = project_ball(h_pred - hp.eta * correction, hp.ball_radius)
    record = predicted.record.model_copy(update={"filter_after": h_new.tolist()})
    if not np.all(np.isfinite(h_new)):
        raise DivergenceError(f"Filter became non-finite at step {record.time}", step=record.time)
    return StepOutcome(predicted.prediction, record, dataclasses.replace(predicted.state, h=h_new))


def adaogf_step(
    state: LearnerState,
    ens: EnsembleAttachment,
    sm: ShiftMatrix,
    x_t: float,
    hp: HyperParams,
    steps_per_arrival: int = 1,
    form: GradientForm = "printed",
    learn_weights: bool = True,
) -> StepOutcome:
    """Adaptive step: alternating descent on the filter, then ``m``, then ``n``.

    The prediction uses the composite moments before any update. Each inner
    iteration evaluates every gradient at the latest iterates.
    """
    step = state.time + 1
    h, m, n = state.h, state.m, state.n
    current = ens.with_combiners(m, n)
    composite = compose_ensemble(current)
    prediction = check_prediction(float(mean_design_row(composite, sm) @ h), step)
    loss = loss_stoch(composite, sm, h, x_t, hp.mu).total

    first_grad = None
    for _ in range(max(1, steps_per_arrival)):
        grad_h = grad_ada_h(current, sm, h, x_t, hp.mu)
        if first_grad is None:
            first_grad = grad_h
        h = project_ball(h - hp.eta * grad_h, hp.ball_radius)

        grad_m = grad_ada_m(current, sm, h, x_t, hp.mu, form=form)
        m = project_simplex(m - hp.eta * grad_m)
        current = current.with_combiners(m, n)

        if learn_weights:
            grad_n = grad_ada_n(current, sm, h, x_t, hp.mu, form=form)
            n = project_simplex(n - hp.eta * grad_n)
            current = current.with_combiners(m, n)

    logger.debug(f"Step {step}: m={np.round(m, 4).tolist()} n={np.round(n, 4).tolist()}")
    record = _record(step, prediction, x_t, loss, first_grad, h)
    return StepOutcome(prediction, record, LearnerState(h=h, time=step, m=m, n=n))
