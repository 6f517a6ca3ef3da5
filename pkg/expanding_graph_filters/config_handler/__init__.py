"""Configuration loading package."""

from .load_configs import (
    _deep_merge,
    DEFAULT_ETA_GRID,
    DEFAULT_ORDER_GRID,
    AuditConfig,
    DataSourceConfig,
    ExperimentConfig,
    LearnerConfig,
    OutputConfig,
    SweepConfig,
    SyntheticConfig,
    load_config_data,
    load_config_yml,
)

__all__ = [
    "_deep_merge",
    "DEFAULT_ETA_GRID",
    "DEFAULT_ORDER_GRID",
    "AuditConfig",
    "DataSourceConfig",
    "ExperimentConfig",
    "LearnerConfig",
    "OutputConfig",
    "SweepConfig",
    "SyntheticConfig",
    "load_config_data",
    "load_config_yml",
]
