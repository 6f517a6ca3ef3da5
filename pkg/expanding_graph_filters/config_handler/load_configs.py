""" Loads Configs """

import logging
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from expanding_graph_filters.attachment.rules import AttachmentRule
from expanding_graph_filters.models.errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[2] / "configs" / "default.yml"

LearnerKind = Literal["dogf", "sogf", "adaogf", "pcogf", "batch", "pretrained"]

DEFAULT_ETA_GRID = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1]
DEFAULT_ORDER_GRID = [1, 3, 5, 7, 9]


class SyntheticConfig(BaseModel):
    """Synthetic dataset: random starting graph plus uniformly attaching nodes."""

    name: str | None = None
    n0: int = Field(default=100, ge=1)
    edge_prob: float = Field(default=0.2, gt=0.0, le=1.0)
    t_total: int = Field(default=1000, ge=1)
    edges_per_node: int = Field(default=5, ge=1)
    bandwidth: int = Field(default=3, ge=1)
    target_kind: Literal["filter", "wmean", "kernel"] = "filter"
    kernel_variance: float = Field(default=10.0, gt=0.0)
    gen_filter_order: int = Field(default=5, ge=1)
    gen_mu: float = Field(default=1e-3, ge=0.0)
    normalize: Literal["none", "spectral", "row"] = "spectral"
    noise_std: float = Field(default=0.0, ge=0.0)
    train_fraction: float = Field(default=0.8, gt=0.0, le=1.0)
    seed: int = 0

    @model_validator(mode="after")
    def check_sizes(self):
        if self.bandwidth > self.n0:
            raise ValueError(f"bandwidth {self.bandwidth} exceeds n0 {self.n0}")
        if self.edges_per_node > self.n0:
            raise ValueError(f"edges_per_node {self.edges_per_node} exceeds n0 {self.n0}")
        return self

    @property
    def label(self) -> str:
        return self.name or self.target_kind


class DataSourceConfig(BaseModel):
    """Synthetic datasets and/or saved stream directories."""

    synthetic: list[SyntheticConfig] = Field(default_factory=list)
    stream_paths: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_nonempty(self):
        if not self.synthetic and not self.stream_paths:
            raise ValueError("data needs at least one synthetic dataset or stream path")
        labels = [s.label for s in self.synthetic]
        if len(set(labels)) != len(labels):
            raise ValueError(f"synthetic dataset names must be unique, got {labels}")
        return self


def _default_rules() -> list[AttachmentRule]:
    return [
        AttachmentRule(kind=kind)
        for kind in ("uniform", "degree", "betweenness", "eigenvector", "pagerank")
    ]


class LearnerConfig(BaseModel):
    """One learner and its hyperparameter grids."""

    kind: LearnerKind
    name: str | None = None
    eta_grid: list[float] = Field(default_factory=lambda: list(DEFAULT_ETA_GRID), min_length=1)
    mu_grid: list[float] = Field(default_factory=lambda: [0.0], min_length=1)
    order_grid: list[int] | None = None
    ball_radius: float | None = Field(default=None, gt=0.0)
    rule: AttachmentRule = Field(default_factory=AttachmentRule)
    rules: list[AttachmentRule] = Field(default_factory=_default_rules, min_length=1)
    w_h: float | None = Field(default=None, gt=0.0)
    steps_per_arrival: int = Field(default=1, ge=1)
    freeze_weights: bool = False
    learn_weights: bool = True
    gradient_form: Literal["printed", "exact"] = "printed"

    @model_validator(mode="after")
    def check_grids(self):
        if any(eta < 0 for eta in self.eta_grid) or any(mu < 0 for mu in self.mu_grid):
            raise ValueError("eta and mu grids must be nonnegative")
        if self.order_grid is not None and (not self.order_grid or min(self.order_grid) < 1):
            raise ValueError("order_grid must be nonempty with orders >= 1")
        return self

    @property
    def label(self) -> str:
        return self.name or self.kind


class SweepConfig(BaseModel):
    """Selection protocol and the sensitivity sweeps."""

    order_grid: list[int] = Field(default_factory=lambda: list(DEFAULT_ORDER_GRID), min_length=1)
    selection_window: float = Field(default=0.5, gt=0.0, le=1.0)
    eta_sweep: bool = True
    order_sweep: bool = True


class OutputConfig(BaseModel):
    """Where result tables and per-run step files go."""

    base_path: str = "results"
    write_steps: bool = True


class AuditConfig(BaseModel):
    """Bound audit settings."""

    learners: list[LearnerKind] = Field(default_factory=lambda: ["dogf", "sogf", "adaogf"])
    realizations: int = Field(default=1, ge=1)
    tolerance: float = Field(default=1e-9, ge=0.0)


class ExperimentConfig(BaseModel):
    """Experiment Configuration"""

    name: str = "experiment"
    data: DataSourceConfig
    learners: list[LearnerConfig] = Field(min_length=1)
    sweeps: SweepConfig = Field(default_factory=SweepConfig)
    realizations: int = Field(default=10, ge=1)
    seed: int | None = None
    output: OutputConfig = Field(default_factory=OutputConfig)
    audit: AuditConfig = Field(default_factory=AuditConfig)
    max_workers: int = Field(default=4, ge=1)

    @model_validator(mode="after")
    def check_labels(self):
        labels = [learner.label for learner in self.learners]
        if len(set(labels)) != len(labels):
            raise ValueError(f"learner labels must be unique, got {labels}")
        return self

    def learner_for(self, kind: LearnerKind) -> LearnerConfig:
        """First configured learner of a kind, or that kind with default settings."""
        for learner in self.learners:
            if learner.kind == kind:
                return learner
        return LearnerConfig(kind=kind)


def _deep_merge(base: dict, override: dict) -> dict:
    """Recursively merge override into base, override takes precedence."""
    result = base.copy()
    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = value
    return result


def _read_yaml(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path) as f:
        try:
            return yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in {path}: {e}") from e


def load_config_data(
    config_path: str | Path | None = None,
    overrides: dict | None = None,
    default_path: str | Path | None = DEFAULT_CONFIG_PATH,
) -> dict:
    """Merge defaults, command-line overrides and the config file (in that order)."""
    config_data: dict = {}
    if default_path is not None and Path(default_path).exists():
        config_data = _read_yaml(default_path)
    elif default_path is not None:
        logger.warning(f"Default config {default_path} not found, continuing without defaults")

    if overrides:
        config_data = _deep_merge(config_data, overrides)

    if config_path:
        logger.info(f"Loading config from: {config_path}")
        config_data = _deep_merge(config_data, _read_yaml(config_path))
    return config_data


def load_config_yml(
    config_path: str | Path | None = None,
    overrides: dict | None = None,
    default_path: str | Path | None = DEFAULT_CONFIG_PATH,
) -> ExperimentConfig:
    """Load an experiment configuration with Pydantic validation.

    Args:
        config_path: Experiment YAML merged over the defaults
        overrides: Values from command-line flags (lower precedence than the file)
        default_path: Defaults file; ``None`` skips it

    Returns:
        Validated ExperimentConfig

    Raises:
        FileNotFoundError: A named config file does not exist
        ConfigurationError: The merged configuration is invalid
    """
    config_data = load_config_data(config_path, overrides, default_path)
    try:
        return ExperimentConfig(**config_data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid experiment configuration: {e}") from e
