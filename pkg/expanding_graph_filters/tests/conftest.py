"""Test configuration and fixtures."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from expanding_graph_filters.config_handler import SyntheticConfig
from expanding_graph_filters.datagen import generate_base, generate_stream
from expanding_graph_filters.graph import ExpandingGraph, GraphSignal


@pytest.fixture
def temp_dir():
    """Create temporary directory for test outputs."""
    with tempfile.TemporaryDirectory() as tmp:
        yield Path(tmp)


@pytest.fixture
def rng():
    """Seeded generator for randomized property checks."""
    return np.random.default_rng(20240611)


def random_graph(rng: np.random.Generator, n: int, density: float = 0.3) -> ExpandingGraph:
    """Random directed graph without self-loops, weights in (0, 1]."""
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    dense = np.where(mask, 1.0 - rng.random((n, n)), 0.0)
    return ExpandingGraph.from_dense(dense, weight_cap=1.0)


@pytest.fixture
def small_graph(rng):
    """Ten-node random graph with a random signal."""
    graph = random_graph(rng, 10)
    return graph, GraphSignal(rng.standard_normal(10))


@pytest.fixture
def small_config():
    """Small synthetic Filter dataset."""
    return SyntheticConfig(
        name="tiny",
        n0=12,
        edge_prob=0.3,
        t_total=30,
        edges_per_node=3,
        bandwidth=2,
        gen_filter_order=3,
        seed=5,
    )


@pytest.fixture
def small_stream(small_config):
    """Thirty arrivals over a twelve-node starting graph."""
    return generate_stream(small_config, generate_base(small_config), 0)
