"""CSV codec for graphs (``src,dst,weight``) and signals (``node,value``)."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import polars as pl

from expanding_graph_filters.graph.expanding import ExpandingGraph, GraphSignal
from expanding_graph_filters.models.errors import (
    DimensionError,
    InvariantViolation,
    StreamParseError,
    StreamSchemaError,
)

logger = logging.getLogger(__name__)

GRAPH_COLUMNS = ["src", "dst", "weight"]
SIGNAL_COLUMNS = ["node", "value"]


def format_float(value: float) -> str:
    """Decimal text with 17 significant digits (exact float64 round-trip)."""
    return f"{value:.17g}"


def read_text_table(path: str | Path, columns: list[str]) -> pl.DataFrame:
    """Read a CSV as all-text columns after checking its header."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No such file: {path}")
    try:
        df = pl.read_csv(path, infer_schema_length=0)
    except pl.exceptions.NoDataError:
        return pl.DataFrame(schema={c: pl.Utf8 for c in columns})
    except pl.exceptions.ComputeError as e:
        raise StreamParseError(f"Unreadable CSV: {e}", path=str(path), line=1) from e
    if df.columns != columns:
        raise StreamParseError(
            f"Expected header {','.join(columns)}, found {','.join(df.columns)}",
            path=str(path),
            line=1,
        )
    return df


def parse_int(text: str | None, path: Path | str, line: int) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        raise StreamParseError(f"Not an integer: {text!r}", path=str(path), line=line) from None


def parse_float(text: str | None, path: Path | str, line: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise StreamParseError(f"Not a number: {text!r}", path=str(path), line=line) from None
    if not np.isfinite(value):
        raise StreamParseError(f"Non-finite number: {text!r}", path=str(path), line=line)
    return value


def write_graph_csv(graph: ExpandingGraph, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    src, dst, weights = graph.edge_arrays()
    df = pl.DataFrame(
        {
            "src": src,
            "dst": dst,
            "weight": [format_float(w) for w in weights.tolist()],
        },
        schema={"src": pl.Int64, "dst": pl.Int64, "weight": pl.Utf8},
    )
    df.write_csv(path)
    logger.debug(f"Wrote {graph.n_edges} edges to {path}")
    return path


def read_graph_csv(
    path: str | Path,
    n_nodes: int | None = None,
    weight_cap: float | None = None,
    max_attachment: int | None = None,
) -> ExpandingGraph:
    """Read a starting graph.

    Args:
        path: CSV with ``src,dst,weight`` rows
        n_nodes: Node count; inferred from the largest endpoint when omitted
        weight_cap: Edge-weight cap; the largest weight when omitted
        max_attachment: Optional cap on edges per arriving node

    Returns:
        The graph snapshot
    """
    df = read_text_table(path, GRAPH_COLUMNS)
    rows = df.rows()
    src = np.empty(len(rows), dtype=np.int64)
    dst = np.empty(len(rows), dtype=np.int64)
    weights = np.empty(len(rows))
    for i, (s, d, w) in enumerate(rows):
        line = i + 2
        src[i] = parse_int(s, path, line)
        dst[i] = parse_int(d, path, line)
        weights[i] = parse_float(w, path, line)

    if n_nodes is None:
        n_nodes = int(max(src.max(), dst.max())) + 1 if len(rows) else 1
    try:
        return ExpandingGraph.from_edges(n_nodes, src, dst, weights, weight_cap, max_attachment)
    except (DimensionError, InvariantViolation) as e:
        raise StreamSchemaError(f"{path}: {e}") from e


def write_signal_csv(signal: GraphSignal, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pl.DataFrame(
        {
            "node": np.arange(len(signal), dtype=np.int64),
            "value": [format_float(v) for v in signal.values.tolist()],
        },
        schema={"node": pl.Int64, "value": pl.Utf8},
    )
    df.write_csv(path)
    return path


def read_signal_csv(path: str | Path) -> GraphSignal:
    """Read a signal; nodes must be listed as ``0..N-1`` in order."""
    df = read_text_table(path, SIGNAL_COLUMNS)
    values = np.empty(df.height)
    for i, (node, value) in enumerate(df.rows()):
        line = i + 2
        if parse_int(node, path, line) != i:
            raise StreamSchemaError(f"{path}:{line}: expected node {i}, found {node}")
        values[i] = parse_float(value, path, line)
    return GraphSignal(values)
