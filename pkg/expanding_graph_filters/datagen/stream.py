"""Node streams: a starting graph and signal followed by arriving nodes.

On disk a stream is a directory holding ``graph.csv`` (``src,dst,weight``),
``signal.csv`` (``node,value``), ``stream.csv``
(``t,value,attach_indices,attach_weights`` with semicolon-separated lists)
and ``manifest.json``.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import polars as pl
from pydantic import BaseModel, Field

from expanding_graph_filters.graph import (
    AttachmentVector,
    ExpandingGraph,
    GraphSignal,
    read_graph_csv,
    read_signal_csv,
    write_graph_csv,
    write_signal_csv,
)
from expanding_graph_filters.graph.io import format_float, parse_float, parse_int, read_text_table
from expanding_graph_filters.models.errors import (
    EmptyStreamError,
    InvariantViolation,
    StreamSchemaError,
)

logger = logging.getLogger(__name__)

GRAPH_FILE = "graph.csv"
SIGNAL_FILE = "signal.csv"
STREAM_FILE = "stream.csv"
MANIFEST_FILE = "manifest.json"
STREAM_COLUMNS = ["t", "value", "attach_indices", "attach_weights"]
DEFAULT_TRAIN_FRACTION = 0.8


@dataclass(frozen=True, eq=False)
class StreamRecord:
    """Arrival ``t``: its attachment to the existing nodes and its revealed signal."""

    time: int
    value: float
    attachment: AttachmentVector


class StreamManifest(BaseModel):
    """Sidecar metadata stored next to a saved stream."""

    name: str
    n0: int
    t_total: int
    train_fraction: float = DEFAULT_TRAIN_FRACTION
    split_index: int
    weight_cap: float
    seed: int | None = None
    realization: int | None = None
    config: dict = Field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class NodeStream:
    """Starting snapshot plus ordered arrivals; the train split is the leading prefix."""

    graph0: ExpandingGraph
    signal0: GraphSignal
    records: tuple[StreamRecord, ...]
    name: str = "stream"
    train_fraction: float = DEFAULT_TRAIN_FRACTION
    seed: int | None = None
    realization: int | None = None
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.signal0) != self.graph0.n_nodes:
            raise StreamSchemaError(
                f"Starting signal has {len(self.signal0)} values for {self.graph0.n_nodes} nodes"
            )
        if not 0.0 < self.train_fraction <= 1.0:
            raise StreamSchemaError(f"Train fraction must lie in (0, 1], got {self.train_fraction}")
        n0 = self.graph0.n_nodes
        for offset, record in enumerate(self.records):
            expected_time = offset + 1
            if record.time != expected_time:
                raise StreamSchemaError(f"Record {offset} has time {record.time}, expected {expected_time}")
            if record.attachment.length != n0 + record.time - 1:
                raise StreamSchemaError(
                    f"Record {record.time} attaches over {record.attachment.length} nodes, "
                    f"expected {n0 + record.time - 1}"
                )

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n0(self) -> int:
        return self.graph0.n_nodes

    @property
    def split_index(self) -> int:
        """Number of training arrivals (the first 80% by default)."""
        return int(math.floor(self.train_fraction * len(self.records)))

    @property
    def train(self) -> tuple[StreamRecord, ...]:
        return self.records[: self.split_index]

    @property
    def test(self) -> tuple[StreamRecord, ...]:
        return self.records[self.split_index :]

    @property
    def expected_edges(self) -> float:
        """Mean edge count of the training arrivals (all arrivals without a training prefix)."""
        records = self.train or self.records
        if not records:
            return 1.0
        return max(1.0, float(np.mean([record.attachment.nnz for record in records])))

    @property
    def weight_cap(self) -> float:
        cap = self.graph0.weight_cap
        for record in self.records:
            if record.attachment.nnz:
                cap = max(cap, float(record.attachment.weights.max()))
        return cap

    @property
    def max_attachment(self) -> int:
        return max((r.attachment.nnz for r in self.records), default=0)

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records], dtype=np.float64)

    def replay(self) -> Iterator[tuple[ExpandingGraph, GraphSignal, StreamRecord]]:
        """Yield ``(G_{t-1}, x_{t-1}, record_t)`` for every arrival."""
        graph = self.graph0
        if graph.weight_cap < self.weight_cap:
            graph = ExpandingGraph.from_edges(
                graph.n_nodes, *graph.edge_arrays(), weight_cap=self.weight_cap
            )
        signal = self.signal0
        for record in self.records:
            yield graph, signal, record
            graph = graph.expand(record.attachment)
            signal = signal.append(record.value)

    def manifest(self) -> StreamManifest:
        return StreamManifest(
            name=self.name,
            n0=self.n0,
            t_total=len(self),
            train_fraction=self.train_fraction,
            split_index=self.split_index,
            weight_cap=self.weight_cap,
            seed=self.seed,
            realization=self.realization,
            config=self.config,
        )


def _join(values: np.ndarray, fmt) -> str:
    return ";".join(fmt(v) for v in values.tolist())


def save_stream(stream: NodeStream, path: str | Path) -> Path:
    """Write a stream directory; floats keep 17 significant digits."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    write_graph_csv(stream.graph0, directory / GRAPH_FILE)
    write_signal_csv(stream.signal0, directory / SIGNAL_FILE)

    df = pl.DataFrame(
        {
            "t": [r.time for r in stream.records],
            "value": [format_float(r.value) for r in stream.records],
            "attach_indices": [_join(r.attachment.indices, str) for r in stream.records],
            "attach_weights": [_join(r.attachment.weights, format_float) for r in stream.records],
        },
        schema={"t": pl.Int64, "value": pl.Utf8, "attach_indices": pl.Utf8, "attach_weights": pl.Utf8},
    )
    df.write_csv(directory / STREAM_FILE)

    with open(directory / MANIFEST_FILE, "w") as f:
        json.dump(stream.manifest().model_dump(mode="json"), f, indent=2)

    logger.info(f"Saved stream '{stream.name}' ({len(stream)} arrivals) to {directory}")
    return directory


def _split(text: str | None) -> list[str]:
    if text is None or text.strip() == "":
        return []
    return text.split(";")


def load_stream(path: str | Path) -> NodeStream:
    """Read a stream directory written by :func:`save_stream` (or by hand).

    Raises:
        StreamParseError: A row cannot be parsed (message carries file and line)
        StreamSchemaError: Attachments are inconsistent with the growing graph
        EmptyStreamError: The stream file holds no arrivals
    """
    directory = Path(path)
    manifest = None
    if (directory / MANIFEST_FILE).exists():
        with open(directory / MANIFEST_FILE) as f:
            manifest = StreamManifest(**json.load(f))

    signal0 = read_signal_csv(directory / SIGNAL_FILE)
    stream_path = directory / STREAM_FILE
    df = read_text_table(stream_path, STREAM_COLUMNS)
    if df.height == 0:
        raise EmptyStreamError(f"{stream_path} holds no arrivals")

    n0 = len(signal0)
    records = []
    for i, (t, value, indices, weights) in enumerate(df.rows()):
        line = i + 2
        time = parse_int(t, stream_path, line)
        index_list = [parse_int(v, stream_path, line) for v in _split(indices)]
        weight_list = [parse_float(v, stream_path, line) for v in _split(weights)]
        if len(index_list) != len(weight_list):
            raise StreamSchemaError(
                f"{stream_path}:{line}: {len(index_list)} indices but {len(weight_list)} weights"
            )
        length = n0 + time - 1
        if any(j < 0 or j >= length for j in index_list):
            raise StreamSchemaError(f"{stream_path}:{line}: attachment index outside [0, {length})")
        try:
            attachment = AttachmentVector(length, np.array(index_list, dtype=np.int64), np.array(weight_list))
        except InvariantViolation as e:
            raise StreamSchemaError(f"{stream_path}:{line}: {e}") from e
        records.append(StreamRecord(time, parse_float(value, stream_path, line), attachment))

    weight_cap = manifest.weight_cap if manifest else None
    graph0 = read_graph_csv(directory / GRAPH_FILE, n_nodes=n0)
    if weight_cap is not None and weight_cap > graph0.weight_cap:
        graph0 = ExpandingGraph.from_edges(n0, *graph0.edge_arrays(), weight_cap=weight_cap)

    stream = NodeStream(
        graph0=graph0,
        signal0=signal0,
        records=tuple(records),
        name=manifest.name if manifest else directory.name,
        train_fraction=manifest.train_fraction if manifest else DEFAULT_TRAIN_FRACTION,
        seed=manifest.seed if manifest else None,
        realization=manifest.realization if manifest else None,
        config=manifest.config if manifest else {},
    )
    logger.info(f"Loaded stream '{stream.name}' ({len(stream)} arrivals, N0={n0}) from {directory}")
    return stream
