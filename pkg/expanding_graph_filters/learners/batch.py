"""Batch least-squares filter and pre-training on the starting graph."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from scipy import linalg, sparse

from expanding_graph_filters.graph import AttachmentVector, ExpandingGraph, GraphSignal, ShiftMatrix
from expanding_graph_filters.learners.online import HyperParams
from expanding_graph_filters.learners.projections import project_ball
from expanding_graph_filters.models.errors import ConfigurationError, DimensionError

logger = logging.getLogger(__name__)

StreamSample = tuple[AttachmentVector, ShiftMatrix, float]


def solve_normal_equations(design: np.ndarray, targets: np.ndarray, mu: float) -> np.ndarray:
    """Solve ``(G^T G + mu I) h = G^T x`` by Cholesky.

    A singular system (only possible for ``mu = 0``) falls back to the
    minimum-norm least-squares solution.
    """
    design = np.asarray(design, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if design.ndim != 2 or design.shape[0] != targets.size:
        raise DimensionError(f"Design of shape {design.shape} vs {targets.size} targets")
    if mu < 0:
        raise ConfigurationError(f"Regularization must be nonnegative, got {mu}")

    gram = design.T @ design + mu * np.eye(design.shape[1])
    rhs = design.T @ targets
    try:
        factor = linalg.cho_factor(gram)
        return linalg.cho_solve(factor, rhs)
    except linalg.LinAlgError:
        logger.warning("Normal equations are singular, using minimum-norm least squares")
        solution, *_ = linalg.lstsq(design, targets)
        return solution


def design_matrix(stream: Sequence[StreamSample]) -> tuple[np.ndarray, np.ndarray]:
    """Stack the design rows ``a_t^T A_x`` and targets of a stream."""
    if not stream:
        raise DimensionError("Batch solve needs at least one sample")
    rows = [sm.project(a) for a, sm, _ in stream]
    orders = {row.size for row in rows}
    if len(orders) != 1:
        raise DimensionError(f"Samples mix filter orders {sorted(orders)}")
    return np.vstack(rows), np.array([x for _, _, x in stream], dtype=np.float64)


def batch_solve(stream: Sequence[StreamSample], mu: float) -> np.ndarray:
    """Regularized least-squares filter over a whole stream."""
    design, targets = design_matrix(stream)
    return solve_normal_equations(design, targets, mu)


def self_prediction_design(graph0: ExpandingGraph, x0: GraphSignal, order: int) -> np.ndarray:
    """Design rows of masked self-prediction on the starting graph.

    Row ``i`` predicts ``x0[i]`` from node ``i``'s incoming edges with entry
    ``i`` of the signal zeroed, i.e. ``[A^(k+1) x]_i - x_i [A^(k+1)]_ii``.
    """
    if order < 1:
        raise ConfigurationError(f"Filter order must be at least 1, got {order}")
    if len(x0) != graph0.n_nodes:
        raise DimensionError(f"Signal of length {len(x0)} on a graph of {graph0.n_nodes} nodes")

    adjacency = graph0.to_csr()
    x = x0.values
    design = np.empty((graph0.n_nodes, order))
    shifted = x
    power = sparse.identity(graph0.n_nodes, format="csr")
    for k in range(order):
        shifted = adjacency @ shifted
        power = adjacency @ power
        design[:, k] = shifted - x * power.diagonal()
    return design


def pretrain(graph0: ExpandingGraph, x0: GraphSignal, hp: HyperParams) -> np.ndarray:
    """Pre-train the filter on the starting graph by masked self-prediction.

    Uses ``hp.mu``, ``hp.order`` and ``hp.ball_radius``; the learning rate is ignored.
    """
    if graph0.n_nodes < 1:
        raise DimensionError("Pre-training needs a nonempty graph")
    design = self_prediction_design(graph0, x0, hp.order)
    h = solve_normal_equations(design, x0.values, hp.mu)
    logger.debug(f"Pre-trained order-{hp.order} filter on {graph0.n_nodes} nodes: {np.round(h, 6).tolist()}")
    return project_ball(h, hp.ball_radius)
