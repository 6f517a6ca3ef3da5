"""Shift matrix: successive adjacency shifts of the node signal."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass

import numpy as np

from expanding_graph_filters.graph.expanding import AttachmentVector, ExpandingGraph, GraphSignal
from expanding_graph_filters.models.errors import ConfigurationError, DimensionError

logger = logging.getLogger(__name__)


class _ShiftRowBuffer:
    """Growable dense row buffer shared by successive shift-matrix snapshots."""

    def __init__(self, rows: np.ndarray):
        capacity = max(16, 2 * rows.shape[0])
        self.data = np.empty((capacity, rows.shape[1]))
        self.data[: rows.shape[0]] = rows
        self.filled = rows.shape[0]
        self._lock = threading.Lock()

    def append_row(self, n_rows: int, row: np.ndarray) -> _ShiftRowBuffer:
        with self._lock:
            if self.filled == n_rows:
                if n_rows == self.data.shape[0]:
                    grown = np.empty((2 * n_rows, self.data.shape[1]))
                    grown[:n_rows] = self.data[:n_rows]
                    self.data = grown
                self.data[n_rows] = row
                self.filled += 1
                return self
        buffer = _ShiftRowBuffer(self.data[:n_rows])
        return buffer.append_row(n_rows, row)


@dataclass(frozen=True, eq=False)
class ShiftMatrix:
    """The ``N x K`` matrix whose column ``k`` is ``A^k x`` (zero-based ``k``)."""

    n_rows: int
    order: int
    _buffer: _ShiftRowBuffer

    @property
    def values(self) -> np.ndarray:
        view = self._buffer.data[: self.n_rows]
        view.flags.writeable = False
        return view

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.order

    def apply(self, h: np.ndarray) -> np.ndarray:
        """``A_x h``: filter output at every existing node."""
        if h.shape != (self.order,):
            raise DimensionError(f"Filter of shape {h.shape} vs order {self.order}")
        return self.values @ h

    def project(self, attachment: AttachmentVector) -> np.ndarray:
        """``A_x^T a``: the design row of an attachment, in O(K nnz(a))."""
        if attachment.length != self.n_rows:
            raise DimensionError(
                f"Attachment length {attachment.length} vs {self.n_rows} shift-matrix rows"
            )
        return attachment.weights @ self.values[attachment.indices]


def build_shift_matrix(graph: ExpandingGraph, signal: GraphSignal, order: int) -> ShiftMatrix:
    """Build ``[x, Ax, ..., A^(K-1) x]`` by repeated sparse shifts."""
    if order < 1:
        raise ConfigurationError(f"Filter order must be at least 1, got {order}")
    if len(signal) != graph.n_nodes:
        raise DimensionError(f"Signal of length {len(signal)} on a graph of {graph.n_nodes} nodes")

    adjacency = graph.to_csr()
    columns = np.empty((graph.n_nodes, order))
    columns[:, 0] = signal.values
    for k in range(1, order):
        columns[:, k] = adjacency @ columns[:, k - 1]
    return ShiftMatrix(n_rows=graph.n_nodes, order=order, _buffer=_ShiftRowBuffer(columns))


def extend_shift_matrix(
    sm: ShiftMatrix,
    graph_after: ExpandingGraph,
    prev_attachment: AttachmentVector,
    new_signal_value: float,
) -> ShiftMatrix:
    """Advance the shift matrix by one arrival.

    The new node has no outgoing edges, so existing rows are unchanged and the
    appended row is ``[x_t, a^T c_0, ..., a^T c_(K-2)]``.
    """
    if graph_after.n_nodes != sm.n_rows + 1 or prev_attachment.length != sm.n_rows:
        raise DimensionError(
            f"Stale shift matrix: {sm.n_rows} rows, attachment length "
            f"{prev_attachment.length}, graph of {graph_after.n_nodes} nodes"
        )
    last_indices, _ = graph_after.row(sm.n_rows)
    if not np.array_equal(last_indices, prev_attachment.indices):
        raise DimensionError("Expanded graph does not end with the given attachment")

    row = np.empty(sm.order)
    row[0] = new_signal_value
    if sm.order > 1:
        row[1:] = prev_attachment.weights @ sm.values[prev_attachment.indices, : sm.order - 1]
    buffer = sm._buffer.append_row(sm.n_rows, row)
    return ShiftMatrix(n_rows=sm.n_rows + 1, order=sm.order, _buffer=buffer)
