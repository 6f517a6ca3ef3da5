"""Online graph-filter learners, baselines and the streaming run loop."""

from .batch import batch_solve, design_matrix, pretrain, self_prediction_design, solve_normal_equations
from .losses import (
    StochasticLoss,
    grad_ada_h,
    grad_ada_m,
    grad_ada_n,
    grad_det,
    grad_stoch,
    loss_ada,
    loss_det,
    loss_stoch,
    mean_design_row,
    predict_deterministic,
    predict_stochastic,
)
from .online import HyperParams, LearnerState, StepOutcome, adaogf_step, dogf_step, pcogf_step, sogf_step
from .projections import project_ball
from .runner import RunTrace, comparator_filter, grid_search, hyper_params, run_learner, stream_samples

__all__ = [
    "HyperParams",
    "LearnerState",
    "RunTrace",
    "StepOutcome",
    "StochasticLoss",
    "adaogf_step",
    "batch_solve",
    "comparator_filter",
    "design_matrix",
    "dogf_step",
    "grad_ada_h",
    "grad_ada_m",
    "grad_ada_n",
    "grad_det",
    "grad_stoch",
    "grid_search",
    "hyper_params",
    "loss_ada",
    "loss_det",
    "loss_stoch",
    "mean_design_row",
    "pcogf_step",
    "predict_deterministic",
    "predict_stochastic",
    "pretrain",
    "project_ball",
    "run_learner",
    "self_prediction_design",
    "sogf_step",
    "solve_normal_equations",
    "stream_samples",
]
