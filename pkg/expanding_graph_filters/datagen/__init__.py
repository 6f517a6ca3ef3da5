"""Synthetic data generation and node-stream ingestion."""

from expanding_graph_filters.config_handler.load_configs import SyntheticConfig

from .stream import NodeStream, StreamManifest, StreamRecord, load_stream, save_stream
from .synthetic import generate_base, generate_stream, kernel_target, weighted_mean_target

__all__ = [
    "NodeStream",
    "StreamManifest",
    "StreamRecord",
    "SyntheticConfig",
    "generate_base",
    "generate_stream",
    "kernel_target",
    "load_stream",
    "save_stream",
    "weighted_mean_target",
]
