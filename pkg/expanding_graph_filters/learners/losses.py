"""Instantaneous losses and gradients of the online graph-filter learners.

Notation: ``y = A_x h`` is the filter output on the existing nodes and
``g = A_x^T a`` the design row of an attachment, so the prediction at the
incoming node is ``g^T h``.
"""

from __future__ import annotations

from typing import Literal, NamedTuple

import numpy as np

from expanding_graph_filters.attachment import (
    EnsembleAttachment,
    StochasticAttachment,
    compose_ensemble,
)
from expanding_graph_filters.graph import AttachmentVector, ShiftMatrix
from expanding_graph_filters.models.errors import DimensionError

GradientForm = Literal["printed", "exact"]


class StochasticLoss(NamedTuple):
    total: float
    bias_sq: float
    variance: float
    reg: float


def _check_filter(sm: ShiftMatrix, h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (sm.order,):
        raise DimensionError(f"Filter of shape {h.shape} vs shift matrix with {sm.order} columns")
    return h


def _check_model(sa: StochasticAttachment, sm: ShiftMatrix) -> None:
    if len(sa) != sm.n_rows:
        raise DimensionError(f"Attachment model over {len(sa)} nodes vs {sm.n_rows} shift-matrix rows")


def mean_design_row(sa: StochasticAttachment, sm: ShiftMatrix) -> np.ndarray:
    """``A_x^T (p * w)`` over the support of the mean attachment."""
    _check_model(sa, sm)
    mean = sa.mean
    support = np.flatnonzero(mean)
    return mean[support] @ sm.values[support]


def predict_deterministic(a: AttachmentVector, sm: ShiftMatrix, h: np.ndarray) -> float:
    """Filter output at the incoming node, ``a^T A_x h``."""
    h = _check_filter(sm, h)
    return float(sm.project(a) @ h)


def predict_stochastic(sa: StochasticAttachment, sm: ShiftMatrix, h: np.ndarray) -> float:
    """Expected output at the incoming node, ``(p * w)^T A_x h``."""
    h = _check_filter(sm, h)
    return float(mean_design_row(sa, sm) @ h)


def loss_det(a: AttachmentVector, sm: ShiftMatrix, h: np.ndarray, x_true: float, mu: float) -> float:
    h = _check_filter(sm, h)
    r = float(sm.project(a) @ h) - x_true
    return 0.5 * r * r + mu * float(h @ h)


def grad_det(a: AttachmentVector, sm: ShiftMatrix, h: np.ndarray, x_true: float, mu: float) -> np.ndarray:
    h = _check_filter(sm, h)
    g = sm.project(a)
    r = float(g @ h) - x_true
    return r * g + 2.0 * mu * h


def loss_stoch(
    sa: StochasticAttachment, sm: ShiftMatrix, h: np.ndarray, x_true: float, mu: float
) -> StochasticLoss:
    """Expected squared error split into bias, variance and regularization."""
    h = _check_filter(sm, h)
    r = float(mean_design_row(sa, sm) @ h) - x_true
    bias_sq = 0.5 * r * r

    cov = sa.cov_diag
    support = np.flatnonzero(cov)
    y = sm.values[support] @ h
    variance = 0.5 * float(cov[support] @ (y * y))

    reg = mu * float(h @ h)
    return StochasticLoss(bias_sq + variance + reg, bias_sq, variance, reg)


def grad_stoch(
    sa: StochasticAttachment, sm: ShiftMatrix, h: np.ndarray, x_true: float, mu: float
) -> np.ndarray:
    h = _check_filter(sm, h)
    g = mean_design_row(sa, sm)
    r = float(g @ h) - x_true
    grad = r * g

    cov = sa.cov_diag
    support = np.flatnonzero(cov)
    if support.size:
        rows = sm.values[support]
        grad = grad + rows.T @ (cov[support] * (rows @ h))
    return grad + 2.0 * mu * h


def loss_ada(
    ens: EnsembleAttachment, sm: ShiftMatrix, h: np.ndarray, x_true: float, mu: float
) -> StochasticLoss:
    """Stochastic loss at the composite moments ``P m`` and ``W n``."""
    return loss_stoch(compose_ensemble(ens), sm, h, x_true, mu)


def grad_ada_h(
    ens: EnsembleAttachment, sm: ShiftMatrix, h: np.ndarray, x_true: float, mu: float
) -> np.ndarray:
    return grad_stoch(compose_ensemble(ens), sm, h, x_true, mu)


def _composite_terms(ens: EnsembleAttachment, sm: ShiftMatrix, h: np.ndarray, x_true: float):
    composite = compose_ensemble(ens)
    _check_model(composite, sm)
    h = _check_filter(sm, h)
    y = sm.values @ h
    p_bar, w_bar = composite.probs, composite.weights
    residual = float((p_bar * w_bar) @ y) - x_true
    return p_bar, w_bar, y, residual


def grad_ada_m(
    ens: EnsembleAttachment,
    sm: ShiftMatrix,
    h: np.ndarray,
    x_true: float,
    mu: float,
    form: GradientForm = "printed",
) -> np.ndarray:
    """Gradient with respect to the probability combiner ``m``.

    ``printed`` carries the variance part with coefficients 1 and 2,
    ``exact`` is the derivative of :func:`loss_ada` (coefficients 1/2 and 1).
    """
    p_bar, w_bar, y, residual = _composite_terms(ens, sm, h, x_true)
    P = ens.prob_dict
    yw_sq = (y * w_bar) ** 2
    bias = residual * (P.T @ (w_bar * y))
    if form == "exact":
        return bias + 0.5 * (P.T @ yw_sq) - P.T @ (p_bar * yw_sq)
    return bias + P.T @ yw_sq - 2.0 * (P.T @ (p_bar * yw_sq))


def grad_ada_n(
    ens: EnsembleAttachment,
    sm: ShiftMatrix,
    h: np.ndarray,
    x_true: float,
    mu: float,
    form: GradientForm = "printed",
) -> np.ndarray:
    """Gradient with respect to the weight combiner ``n``.

    ``printed`` keeps only the bias part; ``exact`` adds the variance part
    ``W^T (w * y^2 * p (1 - p))``.
    """
    p_bar, w_bar, y, residual = _composite_terms(ens, sm, h, x_true)
    W = ens.weight_dict
    bias = residual * (W.T @ (p_bar * y))
    if form == "exact":
        return bias + W.T @ (w_bar * y * y * p_bar * (1.0 - p_bar))
    return bias
