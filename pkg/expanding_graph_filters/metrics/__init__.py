"""Regret, NRMSE and the analytic regret bounds."""

from .audit import BoundObservations, audit_regret
from .bounds import (
    RegretBoundParams,
    bound_adaptive,
    bound_deterministic,
    bound_stochastic,
    bound_terms,
    bound_uniform_asymptotic,
    optimal_learning_rate,
    uniform_harmonic_bound,
)
from .regret import RegretLedger, comparator_losses, normalized_regret, nrmse

__all__ = [
    "BoundObservations",
    "RegretBoundParams",
    "RegretLedger",
    "audit_regret",
    "bound_adaptive",
    "bound_deterministic",
    "bound_stochastic",
    "bound_terms",
    "bound_uniform_asymptotic",
    "comparator_losses",
    "normalized_regret",
    "nrmse",
    "optimal_learning_rate",
    "uniform_harmonic_bound",
]
