"""Per-step audit of normalized regret against the analytic bounds."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import polars as pl

from expanding_graph_filters.metrics.bounds import BoundKind, RegretBoundParams, bound_terms
from expanding_graph_filters.metrics.regret import RegretLedger
from expanding_graph_filters.models.errors import DimensionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BoundObservations:
    """Raw per-step quantities recorded along a run and its shadow deterministic run.

    Scalar-constant series (residual, design and output norms, weights, edges,
    filter norms) are turned into running maxima by :meth:`params_at`.
    """

    residual: np.ndarray
    design_norm: np.ndarray
    output_norm: np.ndarray
    weight_max: np.ndarray
    edges: np.ndarray
    filter_norm: np.ndarray
    prob_norm_sq: np.ndarray | None = None
    prob_variance: np.ndarray | None = None
    dict_fro_sq: np.ndarray | None = None
    dict_spec_sq: np.ndarray | None = None
    dict_row_max: np.ndarray | None = None
    filter_distance: np.ndarray | None = None

    def __len__(self) -> int:
        return int(np.asarray(self.residual).size)

    def params_at(self, t: int, eta: float, mu: float, initial_distance_sq: float) -> RegretBoundParams:
        """Bound parameters with constants instantiated as maxima over steps ``1..t``."""
        if not 1 <= t <= len(self):
            raise DimensionError(f"Step {t} outside the {len(self)} recorded steps")
        return RegretBoundParams(
            eta=eta,
            mu=mu,
            residual_bound=float(np.max(self.residual[:t])),
            design_bound=float(np.max(self.design_norm[:t])),
            output_bound=float(np.max(self.output_norm[:t])),
            weight_cap=float(np.max(self.weight_max[:t])),
            max_edges=int(np.max(self.edges[:t])),
            filter_bound=float(np.max(self.filter_norm[:t])),
            initial_distance_sq=initial_distance_sq,
            prob_norm_sq=self.prob_norm_sq,
            prob_variance=self.prob_variance,
            dict_fro_sq=self.dict_fro_sq,
            dict_spec_sq=self.dict_spec_sq,
            dict_row_max=self.dict_row_max,
            filter_distance=self.filter_distance,
        )


def audit_regret(
    ledger: RegretLedger,
    observations: BoundObservations,
    kind: BoundKind,
    eta: float,
    mu: float,
    initial_distance_sq: float,
    tolerance: float = 1e-9,
) -> pl.DataFrame:
    """Table ``t, regret, bound, term1..termk, slack`` with one row per step.

    Slack is ``bound - regret``; a violation is a slack below ``-tolerance``.
    """
    if len(ledger) != len(observations):
        raise DimensionError(f"{len(ledger)} losses vs {len(observations)} observations")

    regret = ledger.normalized
    rows = []
    for t in range(1, len(ledger) + 1):
        params = observations.params_at(t, eta, mu, initial_distance_sq)
        terms = bound_terms(kind, params, t)
        bound = float(sum(terms))
        rows.append([t, float(regret[t - 1]), bound, *terms, bound - float(regret[t - 1])])

    n_terms = len(rows[0]) - 4 if rows else 0
    columns = ["t", "regret", "bound", *[f"term{k}" for k in range(1, n_terms + 1)], "slack"]
    df = pl.DataFrame(rows, schema=columns, orient="row")

    violations = df.filter(pl.col("slack") < -tolerance)
    if violations.height:
        logger.error(f"{kind} bound violated at {violations.height} steps (first t={violations['t'][0]})")
    return df
