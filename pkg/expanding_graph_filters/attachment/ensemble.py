"""Ensemble of attachment rules with simplex-constrained combiners."""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from expanding_graph_filters.attachment.models import SeedLike, StochasticAttachment
from expanding_graph_filters.attachment.rules import AttachmentRule, RuleScorer, rule_probabilities
from expanding_graph_filters.attachment.simplex import SIMPLEX_TOLERANCE, on_simplex
from expanding_graph_filters.graph import ExpandingGraph
from expanding_graph_filters.models.errors import DimensionError, InvariantViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EnsembleAttachment:
    """Probability and weight dictionaries (``N x M``) and their combiners ``m`` and ``n``.

    With ``fixed_weight`` set every weight-dictionary entry equals it and the
    weight combiner is not learned.
    """

    prob_dict: np.ndarray
    weight_dict: np.ndarray
    prob_combiner: np.ndarray
    weight_combiner: np.ndarray
    weight_cap: float
    rules: tuple[AttachmentRule, ...]
    fixed_weight: float | None = None

    def __post_init__(self):
        P = np.asarray(self.prob_dict, dtype=np.float64)
        W = np.asarray(self.weight_dict, dtype=np.float64)
        if P.ndim != 2 or P.shape != W.shape:
            raise DimensionError(f"Dictionaries of shapes {P.shape} and {W.shape}")
        if P.shape[1] != len(self.rules):
            raise DimensionError(f"{P.shape[1]} dictionary columns for {len(self.rules)} rules")
        m = np.asarray(self.prob_combiner, dtype=np.float64).ravel()
        n = np.asarray(self.weight_combiner, dtype=np.float64).ravel()
        if m.size != P.shape[1] or n.size != P.shape[1]:
            raise DimensionError(f"Combiners of sizes {m.size}, {n.size} for {P.shape[1]} rules")
        if not np.all((P >= 0.0) & (P <= 1.0)):
            raise InvariantViolation("Probability dictionary entries must lie in [0, 1]")
        if np.any(W <= 0.0) or W.max(initial=0.0) > self.weight_cap:
            raise InvariantViolation(f"Weight dictionary entries must lie in (0, {self.weight_cap:.6g}]")
        for name, value in (("prob_dict", P), ("weight_dict", W), ("prob_combiner", m), ("weight_combiner", n)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def rule_count(self) -> int:
        return len(self.rules)

    @property
    def n_rows(self) -> int:
        return int(self.prob_dict.shape[0])

    def with_combiners(self, m: np.ndarray, n: np.ndarray) -> EnsembleAttachment:
        return dataclasses.replace(self, prob_combiner=np.array(m), weight_combiner=np.array(n))


def _probability_columns(
    rules: Sequence[AttachmentRule],
    graph: ExpandingGraph,
    scorers: Sequence[RuleScorer] | None,
) -> np.ndarray:
    if scorers is None:
        models = [rule_probabilities(rule, graph) for rule in rules]
    else:
        models = [scorer(graph) for scorer in scorers]
    return np.column_stack([model.probs for model in models])


def initial_ensemble(
    rules: Sequence[AttachmentRule],
    graph: ExpandingGraph,
    rng_seed: SeedLike,
    weight_cap: float | None = None,
    fixed_weight: float | None = None,
    scorers: Sequence[RuleScorer] | None = None,
) -> EnsembleAttachment:
    """Ensemble on the starting graph with uniform combiners ``1/M``.

    The weight dictionary is drawn uniformly from ``(0, w_h]`` unless
    ``fixed_weight`` is given.
    """
    if not rules:
        raise DimensionError("An ensemble needs at least one rule")
    cap = graph.weight_cap if weight_cap is None else float(weight_cap)
    M = len(rules)
    if fixed_weight is None:
        rng = np.random.default_rng(rng_seed)
        W = cap * (1.0 - rng.random((graph.n_nodes, M)))
    else:
        W = np.full((graph.n_nodes, M), float(fixed_weight))
    return EnsembleAttachment(
        prob_dict=_probability_columns(rules, graph, scorers),
        weight_dict=W,
        prob_combiner=np.full(M, 1.0 / M),
        weight_combiner=np.full(M, 1.0 / M),
        weight_cap=max(cap, float(fixed_weight or 0.0)),
        rules=tuple(rules),
        fixed_weight=fixed_weight,
    )


def compose_ensemble(ens: EnsembleAttachment) -> StochasticAttachment:
    """Composite model ``p = P m``, ``w = W n``; the composite is clipped to [0, 1]."""
    if not on_simplex(ens.prob_combiner) or not on_simplex(ens.weight_combiner):
        raise InvariantViolation(
            f"Combiners off the simplex beyond {SIMPLEX_TOLERANCE}: "
            f"m={ens.prob_combiner.tolist()}, n={ens.weight_combiner.tolist()}"
        )
    raw = ens.prob_dict @ ens.prob_combiner
    probs = np.clip(raw, 0.0, 1.0)
    clipped = bool(np.any(raw > 1.0 + 1e-12) or np.any(raw < -1e-12))
    if clipped:
        logger.warning(f"Composite probability clipped (max {raw.max():.6g})")
    weights = np.minimum(ens.weight_dict @ ens.weight_combiner, ens.weight_cap)
    return StochasticAttachment(probs=probs, weights=weights, weight_cap=ens.weight_cap, clipped=clipped)


def append_ensemble_row(
    ens: EnsembleAttachment,
    graph_after: ExpandingGraph,
    rng_seed: SeedLike,
    scorers: Sequence[RuleScorer] | None = None,
    fixed_weight: float | None = None,
) -> EnsembleAttachment:
    """Grow the dictionaries by one node.

    P is recomputed from every rule on ``graph_after``; W gains one row of
    independent uniform draws in ``(0, w_h]``. Combiners are left untouched.

    Args:
        ens: Current ensemble
        graph_after: Graph with the newly arrived node
        rng_seed: Seed or generator for the new weight row
        scorers: Cached rule scorers, one per rule
        fixed_weight: New common weight for fixed-weight ensembles
    """
    if graph_after.n_nodes != ens.n_rows + 1:
        raise DimensionError(
            f"Ensemble has {ens.n_rows} rows but the graph has {graph_after.n_nodes} nodes"
        )
    M = ens.rule_count
    if ens.fixed_weight is None:
        rng = np.random.default_rng(rng_seed)
        row = ens.weight_cap * (1.0 - rng.random(M))
        W = np.vstack([ens.weight_dict, row])
        weight = None
    else:
        weight = ens.fixed_weight if fixed_weight is None else float(fixed_weight)
        W = np.full((graph_after.n_nodes, M), weight)

    return dataclasses.replace(
        ens,
        prob_dict=_probability_columns(ens.rules, graph_after, scorers),
        weight_dict=W,
        weight_cap=ens.weight_cap if weight is None else max(ens.weight_cap, weight),
        fixed_weight=weight,
    )
