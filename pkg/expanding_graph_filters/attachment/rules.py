"""Centrality-based attachment rules."""

from __future__ import annotations

import logging
from typing import Literal

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import sparse

from expanding_graph_filters.attachment.models import StochasticAttachment
from expanding_graph_filters.graph import ExpandingGraph

logger = logging.getLogger(__name__)

RuleKind = Literal["uniform", "degree", "betweenness", "eigenvector", "pagerank"]

PAGERANK_DAMPING = 0.85
PAGERANK_TOLERANCE = 1e-12
PAGERANK_MAX_ITER = 1000
EIGENVECTOR_TOLERANCE = 1e-10
EIGENVECTOR_MAX_ITER = 1000


class AttachmentRule(BaseModel):
    """Heuristic mapping a graph to per-node attachment probabilities.

    ``c_e`` is the expected number of edges of an incoming node. Left unset it
    counts as one edge; learners fill it from the stream they run on.
    """

    model_config = ConfigDict(frozen=True)

    kind: RuleKind = "uniform"
    c_e: float | None = Field(default=None, gt=0.0)
    degree_mode: Literal["total", "out", "in"] = "total"
    refresh_every: int = Field(default=1, ge=1)

    @property
    def edge_count(self) -> float:
        return 1.0 if self.c_e is None else self.c_e

    def with_edge_count(self, expected: float) -> AttachmentRule:
        """This rule with ``c_e = expected`` unless ``c_e`` was configured."""
        if self.c_e is not None:
            return self
        return self.model_copy(update={"c_e": float(expected)})


def pagerank_scores(graph: ExpandingGraph, start: np.ndarray | None = None) -> np.ndarray:
    """Weighted PageRank by sparse power iteration.

    Dangling mass and teleportation are spread uniformly. ``start`` warm-starts
    the iteration (normalized to sum 1).

    Raises:
        nx.PowerIterationFailedConvergence: No convergence within the iteration cap
    """
    n = graph.n_nodes
    adjacency = graph.to_csr()
    out_weight = np.bincount(adjacency.indices, weights=adjacency.data, minlength=n)
    dangling = out_weight == 0.0
    scale = np.divide(1.0, out_weight, out=np.zeros(n), where=~dangling)
    transition = adjacency @ sparse.diags(scale)

    uniform = np.full(n, 1.0 / n)
    x = uniform if start is None or not start.sum() > 0.0 else start / start.sum()
    for _ in range(PAGERANK_MAX_ITER):
        previous = x
        x = PAGERANK_DAMPING * (transition @ previous + previous[dangling].sum() * uniform)
        x += (1.0 - PAGERANK_DAMPING) * uniform
        if np.abs(x - previous).sum() < n * PAGERANK_TOLERANCE:
            return x
    raise nx.PowerIterationFailedConvergence(PAGERANK_MAX_ITER)


def eigenvector_scores(graph: ExpandingGraph) -> np.ndarray:
    """Out-edge eigenvector centrality (power iteration on ``A^T``).

    Raises:
        nx.PowerIterationFailedConvergence: No convergence within the iteration cap
    """
    # networkx scores in-edges; the reversed view scores the out-edges of A
    reversed_view = graph.to_networkx().reverse(copy=False)
    scores = nx.eigenvector_centrality(
        reversed_view, max_iter=EIGENVECTOR_MAX_ITER, tol=EIGENVECTOR_TOLERANCE, weight="weight"
    )
    return np.array([scores[i] for i in range(graph.n_nodes)], dtype=np.float64)


def target_dependencies(graph: ExpandingGraph, target: int) -> np.ndarray:
    """Betweenness every node collects from the shortest paths ending at ``target``.

    Single-source dependency accumulation from ``target`` on the reversed
    graph, one BFS level at a time. Unweighted; the entry of ``target`` is 0.
    """
    n = graph.n_nodes
    adjacency = graph.to_csr()
    # row u holds the sources of u's incoming edges: u's successors once reversed
    pattern = sparse.csr_matrix((np.ones(adjacency.nnz), adjacency.indices, adjacency.indptr), shape=(n, n))

    sigma = np.zeros(n)
    sigma[target] = 1.0
    visited = np.zeros(n, dtype=bool)
    visited[target] = True
    levels = [np.array([target])]
    while True:
        frontier = np.zeros(n)
        frontier[levels[-1]] = sigma[levels[-1]]
        reached = pattern.T @ frontier
        reached[visited] = 0.0
        nodes = np.flatnonzero(reached)
        if nodes.size == 0:
            break
        sigma[nodes] = reached[nodes]
        visited[nodes] = True
        levels.append(nodes)

    delta = np.zeros(n)
    for depth in range(len(levels) - 2, 0, -1):
        deeper = levels[depth + 1]
        coefficient = np.zeros(n)
        coefficient[deeper] = (1.0 + delta[deeper]) / sigma[deeper]
        nodes = levels[depth]
        delta[nodes] = sigma[nodes] * (pattern[nodes] @ coefficient)
    return delta


def centrality_scores(rule: AttachmentRule, graph: ExpandingGraph) -> tuple[np.ndarray, bool]:
    """Raw scores of a rule and whether a fallback to uniform occurred."""
    n = graph.n_nodes
    if rule.kind == "uniform":
        return np.ones(n), False

    if rule.kind == "degree":
        if rule.degree_mode == "out":
            return graph.out_degrees().astype(np.float64), False
        if rule.degree_mode == "in":
            return graph.in_degrees().astype(np.float64), False
        return (graph.out_degrees() + graph.in_degrees()).astype(np.float64), False

    if rule.kind == "betweenness":
        # Unweighted directed shortest paths
        scores = nx.betweenness_centrality(graph.to_networkx(), normalized=False)
        return np.array([scores[i] for i in range(n)], dtype=np.float64), False

    try:
        if rule.kind == "eigenvector":
            return eigenvector_scores(graph), False
        return pagerank_scores(graph), False
    except nx.PowerIterationFailedConvergence:
        logger.warning(f"{rule.kind} centrality did not converge on {n} nodes, using uniform")
        return np.ones(n), True


def scores_to_probabilities(scores: np.ndarray, c_e: float) -> tuple[np.ndarray, bool]:
    """Shift scores to be nonnegative, scale them to sum ``min(c_e, N)`` and clip to [0, 1].

    Returns:
        Probabilities and whether the scores were degenerate (uniform used instead)
    """
    n = scores.size
    shifted = scores - min(0.0, float(scores.min()))
    total = float(shifted.sum())
    fallback = not np.isfinite(total) or total <= 0.0
    if fallback:
        shifted, total = np.ones(n), float(n)
    probs = np.clip(min(c_e, n) * shifted / total, 0.0, 1.0)
    return probs, fallback


def rule_probabilities(
    rule: AttachmentRule,
    graph: ExpandingGraph,
    weight: float | None = None,
    scores: np.ndarray | None = None,
) -> StochasticAttachment:
    """Attachment model of a rule on the current graph.

    Args:
        rule: Rule to evaluate
        graph: Current graph snapshot
        weight: Common candidate edge weight; the median edge weight when omitted
        scores: Precomputed rule scores (skips the centrality computation)

    Returns:
        StochasticAttachment with per-node probabilities and weights
    """
    fallback = False
    if scores is None:
        scores, fallback = centrality_scores(rule, graph)
    probs, degenerate = scores_to_probabilities(scores, rule.edge_count)
    if degenerate and rule.kind != "uniform":
        logger.warning(f"All {rule.kind} scores are zero on {graph.n_nodes} nodes, using uniform")

    value = graph.median_weight() if weight is None else float(weight)
    return StochasticAttachment(
        probs=probs,
        weights=np.full(graph.n_nodes, value),
        weight_cap=max(graph.weight_cap, value),
        fallback=fallback or (degenerate and rule.kind != "uniform"),
    )


def _is_arrival(graph: ExpandingGraph) -> bool:
    """Whether the newest node was appended by ``expand`` (it then has no outgoing edges)."""
    return graph.n_nodes > graph.origin_size


class RuleScorer:
    """Rule probabilities for a graph that grows one node at a time.

    An arriving node only brings incoming edges. It lies on no earlier
    shortest path and has no out-edge eigenvector score, so betweenness only
    gains the paths ending at it and eigenvector scores gain a zero. PageRank
    restarts from the previous scores. With ``refresh_every > 1`` scores are
    recomputed every that many arrivals and new nodes score zero in between.
    """

    def __init__(self, rule: AttachmentRule):
        self.rule = rule
        self._scores: np.ndarray | None = None
        self._fallback = False
        self._pending = 0

    def __call__(self, graph: ExpandingGraph, weight: float | None = None) -> StochasticAttachment:
        scores = self.scores(graph)
        model = rule_probabilities(self.rule, graph, weight=weight, scores=scores)
        if self._fallback and not model.fallback:
            model = model.flagged(fallback=True)
        return model

    def scores(self, graph: ExpandingGraph) -> np.ndarray:
        n = graph.n_nodes
        cached = self._scores
        if cached is not None and cached.size == n:
            return cached
        if cached is None or self._fallback or cached.size != n - 1 or not _is_arrival(graph):
            return self._refresh(graph)

        if self.rule.refresh_every > 1:
            self._pending += 1
            if self._pending >= self.rule.refresh_every:
                return self._refresh(graph)
            self._scores = np.append(cached, 0.0)
            return self._scores

        kind = self.rule.kind
        if kind == "betweenness":
            self._scores = np.append(cached, 0.0) + target_dependencies(graph, n - 1)
        elif kind == "eigenvector":
            self._scores = np.append(cached, 0.0)
        elif kind == "pagerank":
            try:
                self._scores = pagerank_scores(graph, start=np.append(cached, 1.0 / n))
            except nx.PowerIterationFailedConvergence:
                return self._refresh(graph)
        else:
            return self._refresh(graph)
        return self._scores

    def _refresh(self, graph: ExpandingGraph) -> np.ndarray:
        self._scores, self._fallback = centrality_scores(self.rule, graph)
        self._pending = 0
        return self._scores
