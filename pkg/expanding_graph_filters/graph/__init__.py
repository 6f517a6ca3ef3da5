"""Graph core: expanding graphs, attachments, signals and shift matrices."""

from .expanding import AttachmentVector, ExpandingGraph, GraphSignal, expand
from .io import read_graph_csv, read_signal_csv, write_graph_csv, write_signal_csv
from .shift import ShiftMatrix, build_shift_matrix, extend_shift_matrix

__all__ = [
    "AttachmentVector",
    "ExpandingGraph",
    "GraphSignal",
    "ShiftMatrix",
    "expand",
    "build_shift_matrix",
    "extend_shift_matrix",
    "read_graph_csv",
    "read_signal_csv",
    "write_graph_csv",
    "write_signal_csv",
]
