"""Analytic upper bounds on the normalized static regret.

Constants follow the usual assumptions: ``R`` bounds the deterministic
residual, ``C`` the design-row norm ``||A_x^T a||``, ``Y`` the filter-output
norm ``||A_x h||``, ``w_h`` the edge weights, ``M_max`` the edges per arrival
and ``H`` the filter norm. The Lipschitz constant of the deterministic loss is
``L_d = R C + 2 mu H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from expanding_graph_filters.models.errors import ConfigurationError

BoundKind = Literal["deterministic", "stochastic", "adaptive"]


@dataclass(frozen=True, eq=False)
class RegretBoundParams:
    """Assumption constants plus the per-step series the stochastic bounds sum over.

    ``initial_distance_sq`` is ``||h(0) - h*||^2``; it equals ``||h*||^2`` when
    the online filter starts from zero.
    """

    eta: float
    mu: float
    residual_bound: float
    design_bound: float
    output_bound: float
    weight_cap: float
    max_edges: int
    filter_bound: float
    initial_distance_sq: float
    prob_norm_sq: np.ndarray | None = None
    prob_variance: np.ndarray | None = None
    dict_fro_sq: np.ndarray | None = None
    dict_spec_sq: np.ndarray | None = None
    dict_row_max: np.ndarray | None = None
    filter_distance: np.ndarray | None = None

    def __post_init__(self):
        scalars = (
            self.eta, self.mu, self.residual_bound, self.design_bound, self.output_bound,
            self.weight_cap, self.max_edges, self.filter_bound, self.initial_distance_sq,
        )
        if any(not math.isfinite(v) or v < 0 for v in scalars):
            raise ConfigurationError(f"Bound constants must be finite and nonnegative: {scalars}")

    @property
    def lipschitz(self) -> float:
        return self.residual_bound * self.design_bound + 2.0 * self.mu * self.filter_bound

    def with_distance(self, initial_distance_sq: float) -> RegretBoundParams:
        return replace(self, initial_distance_sq=initial_distance_sq)


def _series(params: RegretBoundParams, name: str, T: int) -> np.ndarray:
    values = getattr(params, name)
    if values is None:
        raise ConfigurationError(f"Bound needs the per-step series '{name}'")
    if T < 1 or T > len(values):
        raise ConfigurationError(f"Horizon {T} outside the {len(values)} recorded steps")
    return np.asarray(values[:T], dtype=np.float64)


def deterministic_terms(params: RegretBoundParams, T: int) -> list[float]:
    """``[||h(0) - h*||^2 / (2 eta T), eta L_d^2 / 2]``; infinite for ``eta = 0``."""
    if T < 1:
        raise ConfigurationError(f"Horizon must be at least 1, got {T}")
    if params.eta == 0.0:
        return [math.inf, 0.0]
    return [
        params.initial_distance_sq / (2.0 * params.eta * T),
        0.5 * params.eta * params.lipschitz**2,
    ]


def bound_deterministic(params: RegretBoundParams, T: int) -> float:
    return sum(deterministic_terms(params, T))


def optimal_learning_rate(params: RegretBoundParams, T: int) -> float:
    """Learning rate minimizing the deterministic bound, ``||h(0) - h*|| / (L_d sqrt(T))``."""
    if params.lipschitz == 0.0:
        return math.inf
    return math.sqrt(params.initial_distance_sq) / (params.lipschitz * math.sqrt(T))


def stochastic_terms(params: RegretBoundParams, T: int) -> list[float]:
    """Model mismatch, cross term, variance, filter drift, then the deterministic tail."""
    p_sq = _series(params, "prob_norm_sq", T)
    variance = _series(params, "prob_variance", T)
    distance = _series(params, "filter_distance", T)
    w, Y, R, M = params.weight_cap, params.output_bound, params.residual_bound, params.max_edges
    return [
        w**2 * Y**2 * float(np.mean(p_sq + M)),
        2.0 * R * w * Y * float(np.mean(np.sqrt(p_sq + M))),
        w**2 * Y**2 * float(np.mean(variance)),
        params.lipschitz * float(np.mean(distance)),
        *deterministic_terms(params, T),
    ]


def bound_stochastic(params: RegretBoundParams, T: int) -> float:
    return sum(stochastic_terms(params, T))


def adaptive_terms(params: RegretBoundParams, T: int) -> list[float]:
    """Ensemble form: dictionary norms replace the single-rule probability terms."""
    fro_sq = _series(params, "dict_fro_sq", T)
    spec_sq = _series(params, "dict_spec_sq", T)
    row_max = _series(params, "dict_row_max", T)
    distance = _series(params, "filter_distance", T)
    w, Y, R, M = params.weight_cap, params.output_bound, params.residual_bound, params.max_edges
    return [
        w**2 * Y**2 * float(np.mean(fro_sq + M)),
        R * w * Y * float(np.mean(spec_sq)),
        R * w * Y * (1.0 + M),
        w**2 * Y**2 * float(np.mean(row_max)),
        params.lipschitz * float(np.mean(distance)),
        *deterministic_terms(params, T),
    ]


def bound_adaptive(params: RegretBoundParams, T: int) -> float:
    return sum(adaptive_terms(params, T))


def bound_uniform_asymptotic(params: RegretBoundParams, T: int) -> float:
    """Large-``T`` stochastic bound under uniform attachment ``p_n = 1/N``."""
    distance = _series(params, "filter_distance", T)
    w, Y, R, M = params.weight_cap, params.output_bound, params.residual_bound, params.max_edges
    return (
        w**2 * M * Y**2
        + R * w * Y * (M + 1.0)
        + params.lipschitz * float(np.mean(distance))
        + bound_deterministic(params, T)
    )


def uniform_harmonic_bound(n0: int, T: int) -> float:
    """Upper bound on ``sum_{t=1..T} 1/(n0 + t - 1)``."""
    return math.log(T + n0 - 1) - math.log(n0) + 1.0 / n0


BOUND_TERMS = {
    "deterministic": deterministic_terms,
    "stochastic": stochastic_terms,
    "adaptive": adaptive_terms,
}


def bound_terms(kind: BoundKind, params: RegretBoundParams, T: int) -> list[float]:
    try:
        return BOUND_TERMS[kind](params, T)
    except KeyError:
        raise ConfigurationError(f"Unknown bound kind '{kind}'") from None
