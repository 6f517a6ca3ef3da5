"""Synthetic expanding-graph experiments (Filter, WMean and Kernel targets)."""

from __future__ import annotations

import logging

import networkx as nx
import numpy as np
from scipy import linalg

from expanding_graph_filters.config_handler.load_configs import SyntheticConfig
from expanding_graph_filters.datagen.stream import NodeStream, StreamRecord
from expanding_graph_filters.graph import (
    AttachmentVector,
    ExpandingGraph,
    GraphSignal,
    build_shift_matrix,
    extend_shift_matrix,
)
from expanding_graph_filters.learners.batch import pretrain
from expanding_graph_filters.learners.losses import predict_deterministic
from expanding_graph_filters.learners.online import HyperParams
from expanding_graph_filters.models.errors import ConfigurationError

logger = logging.getLogger(__name__)

MAX_BASE_ATTEMPTS = 5

# SeedSequence stream tags
_BASE, _STREAM, _NOISE = 0, 1, 2


def _rng(config: SyntheticConfig, realization: int, tag: int, attempt: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([config.seed, realization, tag, attempt]))


def _normalize_weights(n: int, src: np.ndarray, dst: np.ndarray, weights: np.ndarray, mode: str) -> np.ndarray:
    if mode == "none" or weights.size == 0:
        return weights
    if mode == "row":
        row_sums = np.bincount(dst, weights=weights, minlength=n)
        return weights / row_sums[dst]
    dense = np.zeros((n, n))
    dense[dst, src] = weights
    radius = float(np.max(np.abs(linalg.eigvals(dense))))
    return weights / radius if radius > 0.0 else weights


def bandlimited_signal(graph: ExpandingGraph, bandwidth: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-norm random combination of the first ``bandwidth`` Laplacian eigenvectors.

    The Laplacian is taken on the symmetrized adjacency ``(A + A^T) / 2``.
    """
    dense = graph.to_dense()
    sym = 0.5 * (dense + dense.T)
    laplacian = np.diag(sym.sum(axis=1)) - sym
    _, eigenvectors = linalg.eigh(laplacian)
    signal = eigenvectors[:, :bandwidth] @ rng.standard_normal(bandwidth)
    norm = float(np.linalg.norm(signal))
    if not np.isfinite(norm) or norm < 1e-12:
        raise linalg.LinAlgError("Degenerate band-limited signal")
    return signal / norm


def generate_base(config: SyntheticConfig, realization: int = 0) -> tuple[ExpandingGraph, GraphSignal]:
    """Random directed starting graph with a band-limited signal.

    Degenerate draws are regenerated with the next sub-seed.
    """
    for attempt in range(MAX_BASE_ATTEMPTS):
        rng = _rng(config, realization, _BASE, attempt)
        g = nx.gnp_random_graph(
            config.n0, config.edge_prob, seed=int(rng.integers(2**32)), directed=True
        )
        edges = np.array(sorted(g.edges()), dtype=np.int64).reshape(-1, 2)
        src, dst = edges[:, 0], edges[:, 1]
        weights = 1.0 - rng.random(src.size)
        weights = _normalize_weights(config.n0, src, dst, weights, config.normalize)
        graph = ExpandingGraph.from_edges(config.n0, src, dst, weights)
        try:
            signal = bandlimited_signal(graph, config.bandwidth, rng)
        except (linalg.LinAlgError, ValueError) as e:
            logger.warning(f"Base graph attempt {attempt + 1} failed ({e}), regenerating")
            continue
        logger.debug(f"Base graph: {graph.n_nodes} nodes, {graph.n_edges} edges (attempt {attempt + 1})")
        return graph, GraphSignal(signal)

    raise ConfigurationError(f"No usable base graph after {MAX_BASE_ATTEMPTS} attempts")


def weighted_mean_target(attachment: AttachmentVector, signal: np.ndarray) -> float:
    """Attachment-weighted mean of the neighbours' signals (0 for an isolated node)."""
    if attachment.nnz == 0:
        return 0.0
    neighbours = signal[attachment.indices]
    return float(attachment.weights @ neighbours / attachment.weights.sum())


def kernel_target(attachment: AttachmentVector, signal: np.ndarray, variance: float) -> float:
    """Gaussian-kernel regression over the neighbours' signals.

    Neighbour ``i`` gets weight ``beta_i * exp(-(x_i - xbar)^2 / (2 variance))``
    where ``beta`` are the normalized attachment weights and ``xbar`` their
    weighted mean, so the target tends to the weighted mean as the variance grows.
    """
    if attachment.nnz == 0:
        return 0.0
    neighbours = signal[attachment.indices]
    beta = attachment.weights / attachment.weights.sum()
    centre = float(beta @ neighbours)
    kernel = beta * np.exp(-((neighbours - centre) ** 2) / (2.0 * variance))
    return float(kernel @ neighbours / kernel.sum())


def generate_stream(
    config: SyntheticConfig,
    base: tuple[ExpandingGraph, GraphSignal],
    realization: int = 0,
) -> NodeStream:
    """Grow the base graph by ``t_total`` nodes with uniformly drawn attachments.

    Every new node links to ``edges_per_node`` distinct existing nodes, each
    edge weighted with the median edge weight of the starting graph.
    """
    graph0, signal0 = base
    rng = _rng(config, realization, _STREAM)
    noise_rng = _rng(config, realization, _NOISE)
    weight = graph0.median_weight()

    h_gen = None
    sm = None
    if config.target_kind == "filter":
        gen_params = HyperParams(eta=0.0, mu=config.gen_mu, order=config.gen_filter_order)
        h_gen = pretrain(graph0, signal0, gen_params)
        sm = build_shift_matrix(graph0, signal0, config.gen_filter_order)
        logger.info(f"Generating filter: {np.round(h_gen, 6).tolist()}")

    graph = graph0
    values = list(signal0.values.tolist())
    records = []
    for t in range(1, config.t_total + 1):
        n = graph.n_nodes
        targets = rng.choice(n, size=min(config.edges_per_node, n), replace=False)
        attachment = AttachmentVector(n, targets, np.full(targets.size, weight))

        if config.target_kind == "filter":
            value = predict_deterministic(attachment, sm, h_gen)
        elif config.target_kind == "wmean":
            value = weighted_mean_target(attachment, np.asarray(values))
        else:
            value = kernel_target(attachment, np.asarray(values), config.kernel_variance)
        if config.noise_std > 0.0:
            value += config.noise_std * float(noise_rng.standard_normal())

        graph = graph.expand(attachment)
        if sm is not None:
            sm = extend_shift_matrix(sm, graph, attachment, value)
        values.append(value)
        records.append(StreamRecord(t, value, attachment))

    return NodeStream(
        graph0=graph0,
        signal0=signal0,
        records=tuple(records),
        name=config.name or config.target_kind,
        train_fraction=config.train_fraction,
        seed=config.seed,
        realization=realization,
        config=config.model_dump(mode="json"),
    )
