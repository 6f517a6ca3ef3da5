"""Expanding-graph snapshots, attachment vectors and node signals.

Adjacency convention: ``A[i, j] != 0`` is a directed edge from node ``j`` toward
node ``i``. Row ``i`` therefore lists the incoming edges of node ``i`` and an
arriving node contributes exactly one new row (its attachment vector) and an
all-zero column.
"""

from __future__ import annotations

import hashlib
import logging
import threading
from collections.abc import Iterator
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np
from scipy import sparse

from expanding_graph_filters.models.errors import DimensionError, InvariantViolation

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class AttachmentVector:
    """Sparse weights of the edges from existing nodes toward an incoming node."""

    length: int
    indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=np.int64).ravel()
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if indices.shape != weights.shape:
            raise DimensionError(
                f"Attachment has {indices.size} indices but {weights.size} weights"
            )
        order = np.argsort(indices, kind="stable")
        indices, weights = indices[order], weights[order]

        if indices.size:
            if indices[0] < 0 or indices[-1] >= self.length:
                raise InvariantViolation(
                    f"Attachment index out of range [0, {self.length})"
                )
            if np.any(np.diff(indices) == 0):
                raise InvariantViolation("Attachment lists a node more than once")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
            raise InvariantViolation("Attachment weights must be finite and strictly positive")

        object.__setattr__(self, "indices", _frozen(indices))
        object.__setattr__(self, "weights", _frozen(weights))

    @classmethod
    def empty(cls, length: int) -> AttachmentVector:
        return cls(length, np.empty(0, dtype=np.int64), np.empty(0))

    @classmethod
    def from_dense(cls, vector: np.ndarray) -> AttachmentVector:
        """Build from a dense vector; zero entries are dropped."""
        vector = np.asarray(vector, dtype=np.float64).ravel()
        support = np.flatnonzero(vector)
        return cls(vector.size, support, vector[support])

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.length)
        dense[self.indices] = self.weights
        return dense

    def dot(self, vector: np.ndarray) -> float:
        """Inner product with a dense vector of the same length."""
        if vector.shape[0] != self.length:
            raise DimensionError(f"Vector of length {vector.shape[0]} vs attachment length {self.length}")
        return float(self.weights @ vector[self.indices])

    def validate(self, weight_cap: float | None = None, max_nonzero: int | None = None) -> None:
        """Check the edge-count and weight-cap assumptions."""
        if max_nonzero is not None and self.nnz > max_nonzero:
            raise InvariantViolation(
                f"Attachment forms {self.nnz} edges, more than the allowed {max_nonzero}"
            )
        if weight_cap is not None and self.nnz and self.weights.max() > weight_cap:
            raise InvariantViolation(
                f"Attachment weight {self.weights.max():.6g} exceeds the cap {weight_cap:.6g}"
            )


@dataclass(frozen=True, eq=False)
class GraphSignal:
    """Real values indexed by node."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        object.__setattr__(self, "values", _frozen(values))

    def __len__(self) -> int:
        return int(self.values.size)

    def with_placeholder(self) -> GraphSignal:
        """The temporary signal: existing values plus a zero at the incoming node."""
        return self.append(0.0)

    def append(self, value: float) -> GraphSignal:
        return GraphSignal(np.append(self.values, float(value)))


class _RowStore:
    """Append-only row lists shared by successive graph snapshots."""

    def __init__(self, indices: list[np.ndarray] | None = None, weights: list[np.ndarray] | None = None):
        self.indices: list[np.ndarray] = indices if indices is not None else []
        self.weights: list[np.ndarray] = weights if weights is not None else []
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.indices)

    def append_row(self, n_rows: int, indices: np.ndarray, weights: np.ndarray) -> _RowStore:
        """Append after the first ``n_rows`` rows, forking when they are not the tip."""
        with self._lock:
            if len(self.indices) == n_rows:
                self.indices.append(indices)
                self.weights.append(weights)
                return self
        store = _RowStore(self.indices[:n_rows], self.weights[:n_rows])
        store.indices.append(indices)
        store.weights.append(weights)
        return store


@dataclass(frozen=True, eq=False)
class ExpandingGraph:
    """Immutable snapshot of a directed weighted graph that grows one node at a time."""

    n_nodes: int
    n_edges: int
    origin_size: int
    weight_cap: float
    max_attachment: int | None = None
    _rows: _RowStore = field(default_factory=_RowStore, repr=False)

    @classmethod
    def from_edges(
        cls,
        n_nodes: int,
        src: np.ndarray,
        dst: np.ndarray,
        weights: np.ndarray,
        weight_cap: float | None = None,
        max_attachment: int | None = None,
    ) -> ExpandingGraph:
        """Build a starting graph from edge triplets ``src -> dst``."""
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        weights = np.asarray(weights, dtype=np.float64).ravel()
        if not (src.shape == dst.shape == weights.shape):
            raise DimensionError("Edge arrays must have equal lengths")
        if n_nodes < 1:
            raise DimensionError("A graph needs at least one node")
        if src.size:
            if min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n_nodes:
                raise DimensionError(f"Edge endpoint outside [0, {n_nodes})")
            if np.any(src == dst):
                raise InvariantViolation("Self-loops are not allowed")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
            raise InvariantViolation("Edge weights must be finite and strictly positive")

        cap = float(weights.max()) if weight_cap is None and weights.size else weight_cap
        cap = 1.0 if cap is None else float(cap)
        if weights.size and weights.max() > cap:
            raise InvariantViolation(f"Edge weight {weights.max():.6g} exceeds the cap {cap:.6g}")

        order = np.lexsort((src, dst))
        src, dst, weights = src[order], dst[order], weights[order]
        if src.size and np.any((np.diff(dst) == 0) & (np.diff(src) == 0)):
            raise InvariantViolation("Duplicate edge")

        bounds = np.searchsorted(dst, np.arange(n_nodes + 1))
        store = _RowStore(
            [_frozen(src[bounds[i]:bounds[i + 1]].copy()) for i in range(n_nodes)],
            [_frozen(weights[bounds[i]:bounds[i + 1]].copy()) for i in range(n_nodes)],
        )
        return cls(
            n_nodes=n_nodes,
            n_edges=int(src.size),
            origin_size=n_nodes,
            weight_cap=cap,
            max_attachment=max_attachment,
            _rows=store,
        )

    @classmethod
    def from_dense(
        cls, matrix: np.ndarray, weight_cap: float | None = None, max_attachment: int | None = None
    ) -> ExpandingGraph:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError("Adjacency must be square")
        dst, src = np.nonzero(matrix)
        return cls.from_edges(matrix.shape[0], src, dst, matrix[dst, src], weight_cap, max_attachment)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Incoming-edge sources and weights of node ``i``."""
        if not 0 <= i < self.n_nodes:
            raise DimensionError(f"Node {i} outside [0, {self.n_nodes})")
        return self._rows.indices[i], self._rows.weights[i]

    def expand(self, attachment: AttachmentVector) -> ExpandingGraph:
        return expand(self, attachment)

    @cached_property
    def _csr(self) -> sparse.csr_matrix:
        n = self.n_nodes
        lengths = np.fromiter((r.size for r in self._rows.indices[:n]), dtype=np.int64, count=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(lengths, out=indptr[1:])
        if indptr[-1]:
            indices = np.concatenate(self._rows.indices[:n])
            data = np.concatenate(self._rows.weights[:n])
        else:
            indices = np.empty(0, dtype=np.int64)
            data = np.empty(0)
        return sparse.csr_matrix((data, indices, indptr), shape=(n, n))

    def to_csr(self) -> sparse.csr_matrix:
        return self._csr

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    @cached_property
    def _networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n_nodes))
        src, dst, weights = self.edge_arrays()
        graph.add_weighted_edges_from(zip(src.tolist(), dst.tolist(), weights.tolist()))
        return graph

    def to_networkx(self) -> nx.DiGraph:
        """Directed networkx view (edge ``j -> i`` for every ``A[i, j]``); do not mutate."""
        return self._networkx

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Edges as ``(src, dst, weight)`` arrays, grouped by destination."""
        csr = self._csr
        dst = np.repeat(np.arange(self.n_nodes), np.diff(csr.indptr))
        return csr.indices.astype(np.int64), dst, csr.data.copy()

    def edges(self) -> Iterator[tuple[int, int, float]]:
        src, dst, weights = self.edge_arrays()
        yield from zip(src.tolist(), dst.tolist(), weights.tolist())

    def edge_weights(self) -> np.ndarray:
        return self._csr.data.copy()

    def median_weight(self) -> float:
        """Median edge weight; the weight cap for an edgeless graph."""
        if self.n_edges == 0:
            return self.weight_cap
        return float(np.median(self._csr.data))

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self._csr.indices, minlength=self.n_nodes)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self._csr.indptr)

    def block_digest(self, n: int) -> str:
        """SHA-256 of the leading ``n x n`` adjacency block."""
        if not 0 <= n <= self.n_nodes:
            raise DimensionError(f"Block size {n} outside [0, {self.n_nodes}]")
        digest = hashlib.sha256()
        for i in range(n):
            indices, weights = self._rows.indices[i], self._rows.weights[i]
            keep = indices < n
            digest.update(np.int64(i).tobytes())
            digest.update(indices[keep].tobytes())
            digest.update(weights[keep].tobytes())
        return digest.hexdigest()


def expand(graph: ExpandingGraph, attachment: AttachmentVector) -> ExpandingGraph:
    """Append one node whose incoming edges are given by ``attachment``."""
    if attachment.length != graph.n_nodes:
        raise DimensionError(
            f"Attachment length {attachment.length} does not match {graph.n_nodes} nodes"
        )
    attachment.validate(weight_cap=graph.weight_cap, max_nonzero=graph.max_attachment)
    rows = graph._rows.append_row(graph.n_nodes, attachment.indices, attachment.weights)
    return ExpandingGraph(
        n_nodes=graph.n_nodes + 1,
        n_edges=graph.n_edges + attachment.nnz,
        origin_size=graph.origin_size,
        weight_cap=graph.weight_cap,
        max_attachment=graph.max_attachment,
        _rows=rows,
    )
