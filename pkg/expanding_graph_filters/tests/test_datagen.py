"""Tests for synthetic data generation and node-stream files."""

import json

import numpy as np
import pytest

from expanding_graph_filters.config_handler import SyntheticConfig
from expanding_graph_filters.datagen import (
    NodeStream,
    StreamRecord,
    generate_base,
    generate_stream,
    kernel_target,
    load_stream,
    save_stream,
    weighted_mean_target,
)
from expanding_graph_filters.graph import AttachmentVector, build_shift_matrix
from expanding_graph_filters.learners import HyperParams, predict_deterministic, pretrain
from expanding_graph_filters.models import EmptyStreamError, StreamParseError, StreamSchemaError


def test_base_graph(small_config):
    """The starting graph has no self-loops and a unit-norm band-limited signal."""
    graph, signal = generate_base(small_config)

    assert graph.n_nodes == small_config.n0
    assert not np.any(np.diag(graph.to_dense()))
    assert np.linalg.norm(signal.values) == pytest.approx(1.0)
    spectral_radius = np.max(np.abs(np.linalg.eigvals(graph.to_dense())))
    assert spectral_radius == pytest.approx(1.0) or graph.n_edges == 0


def test_generation_is_reproducible(small_config):
    """Equal seeds give identical streams; realizations differ."""
    first = generate_stream(small_config, generate_base(small_config, 1), 1)
    second = generate_stream(small_config, generate_base(small_config, 1), 1)
    other = generate_stream(small_config, generate_base(small_config, 2), 2)

    np.testing.assert_array_equal(first.values(), second.values())
    np.testing.assert_array_equal(first.graph0.to_dense(), second.graph0.to_dense())
    assert not np.array_equal(first.values(), other.values())


def test_filter_targets_follow_generating_filter(small_config, small_stream):
    """Filter targets are the generating filter's outputs at each arriving node."""
    graph0, signal0 = small_stream.graph0, small_stream.signal0
    h_gen = pretrain(graph0, signal0, HyperParams(eta=0.0, mu=small_config.gen_mu, order=small_config.gen_filter_order))

    for graph, signal, record in small_stream.replay():
        sm = build_shift_matrix(graph, signal, small_config.gen_filter_order)
        assert record.value == pytest.approx(predict_deterministic(record.attachment, sm, h_gen), abs=1e-12)
        assert record.attachment.nnz == small_config.edges_per_node
        np.testing.assert_allclose(record.attachment.weights, graph0.median_weight())


def test_stream_split(small_stream):
    """The train split is the leading 80% of arrivals."""
    assert len(small_stream) == 30
    assert small_stream.split_index == 24
    assert len(small_stream.train) == 24
    assert small_stream.test[0].time == 25
    assert small_stream.max_attachment == 3


def test_weighted_mean_and_kernel_targets():
    """Kernel regression tends to the weighted mean for large variance."""
    signal = np.array([0.0, 1.0, 4.0])
    attachment = AttachmentVector(3, [0, 1, 2], [1.0, 1.0, 2.0])

    assert weighted_mean_target(attachment, signal) == pytest.approx(9.0 / 4.0)
    assert kernel_target(attachment, signal, 1e9) == pytest.approx(9.0 / 4.0, rel=1e-6)
    assert abs(kernel_target(attachment, signal, 0.5) - 9.0 / 4.0) > 0.1
    assert weighted_mean_target(AttachmentVector.empty(3), signal) == 0.0
    assert kernel_target(AttachmentVector.empty(3), signal, 1.0) == 0.0


@pytest.mark.parametrize("target_kind", ["wmean", "kernel"])
def test_other_targets(small_config, target_kind):
    """Averaging targets stay within the range of the neighbours' signals."""
    config = small_config.model_copy(update={"target_kind": target_kind})
    stream = generate_stream(config, generate_base(config))

    for _, signal, record in stream.replay():
        neighbours = signal.values[record.attachment.indices]
        assert neighbours.min() - 1e-12 <= record.value <= neighbours.max() + 1e-12
    assert stream.config["target_kind"] == target_kind


def test_noise_changes_targets(small_config):
    """Observation noise perturbs only the targets."""
    clean = generate_stream(small_config, generate_base(small_config))
    noisy_config = small_config.model_copy(update={"noise_std": 0.1})
    noisy = generate_stream(noisy_config, generate_base(noisy_config))

    assert not np.allclose(clean.values(), noisy.values())
    for a, b in zip(clean.records, noisy.records):
        np.testing.assert_array_equal(a.attachment.indices, b.attachment.indices)


def test_stream_save_and_load(small_stream, temp_dir):
    """A saved stream reloads with identical arrivals and metadata."""
    path = save_stream(small_stream, temp_dir / "tiny")
    loaded = load_stream(path)

    assert loaded.name == small_stream.name
    assert loaded.split_index == small_stream.split_index
    assert loaded.seed == small_stream.seed
    np.testing.assert_array_equal(loaded.values(), small_stream.values())
    np.testing.assert_array_equal(loaded.graph0.to_dense(), small_stream.graph0.to_dense())
    np.testing.assert_array_equal(loaded.records[-1].attachment.weights, small_stream.records[-1].attachment.weights)

    manifest = json.loads((path / "manifest.json").read_text())
    assert manifest["t_total"] == 30


def _write_stream(directory, rows: str):
    directory.mkdir()
    (directory / "graph.csv").write_text("src,dst,weight\n0,1,1.0\n")
    (directory / "signal.csv").write_text("node,value\n0,0.5\n1,-0.5\n")
    (directory / "stream.csv").write_text("t,value,attach_indices,attach_weights\n" + rows)
    return directory


def test_load_stream_without_manifest(temp_dir):
    """Hand-written streams load with default metadata."""
    stream = load_stream(_write_stream(temp_dir / "manual", "1,0.25,0;1,0.5;0.5\n2,0.1,,\n"))

    assert stream.name == "manual"
    assert stream.records[0].attachment.indices.tolist() == [0, 1]
    assert stream.records[1].attachment.nnz == 0
    assert stream.records[1].attachment.length == 3


def test_load_stream_errors(temp_dir):
    """Malformed rows are parse errors; inconsistent ones are schema errors."""
    with pytest.raises(StreamParseError) as excinfo:
        load_stream(_write_stream(temp_dir / "parse", "1,0.25,0,0.5\n2,oops,0,0.5\n"))
    assert excinfo.value.line == 3

    with pytest.raises(StreamSchemaError):
        load_stream(_write_stream(temp_dir / "range", "1,0.25,2,0.5\n"))
    with pytest.raises(StreamSchemaError):
        load_stream(_write_stream(temp_dir / "count", "1,0.25,0;1,0.5\n"))
    with pytest.raises(StreamSchemaError):
        load_stream(_write_stream(temp_dir / "dup", "1,0.25,0;0,0.5;0.5\n"))
    with pytest.raises(StreamSchemaError):
        load_stream(_write_stream(temp_dir / "gap", "2,0.25,0,0.5\n"))
    with pytest.raises(EmptyStreamError):
        load_stream(_write_stream(temp_dir / "empty", ""))


def test_node_stream_validates_records(small_stream):
    """Records must be numbered 1..T over the growing node count."""
    record = small_stream.records[0]
    with pytest.raises(StreamSchemaError):
        NodeStream(small_stream.graph0, small_stream.signal0, (StreamRecord(1, 0.0, AttachmentVector.empty(3)),))
    with pytest.raises(StreamSchemaError):
        NodeStream(small_stream.graph0, small_stream.signal0, (record,), train_fraction=0.0)


def test_synthetic_config_seed_changes_stream(small_config):
    """Different seeds give different base graphs."""
    other = SyntheticConfig(**{**small_config.model_dump(), "seed": 6})
    assert not np.array_equal(generate_base(small_config)[0].to_dense(), generate_base(other)[0].to_dense())
