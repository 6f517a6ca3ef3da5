"""Tests for config handler."""

import pytest
import yaml

from expanding_graph_filters.config_handler import (
    DEFAULT_ETA_GRID,
    ExperimentConfig,
    LearnerConfig,
    SyntheticConfig,
    _deep_merge,
    load_config_data,
    load_config_yml,
)
from expanding_graph_filters.models import ConfigurationError


@pytest.fixture
def default_config():
    """Test fixture for default config."""
    return {
        "realizations": 10,
        "sweeps": {"order_grid": [1, 3, 5, 7, 9], "selection_window": 0.5},
        "output": {"base_path": "./results", "write_steps": True},
        "learners": [{"kind": "dogf"}, {"kind": "sogf"}],
    }


@pytest.fixture
def experiment_config():
    """Test fixture for a specific experiment (overrides some defaults)."""
    return {
        "name": "filter-run",
        "sweeps": {"order_grid": [3]},
        "output": {"base_path": "./results/filter"},
        "data": {"synthetic": [{"name": "filter", "n0": 20, "t_total": 40}]},
        "learners": [{"kind": "adaogf"}],
    }


def _write(path, data):
    path.write_text(yaml.safe_dump(data))
    return path


def test_config_merge_precedence(default_config, experiment_config):
    """Test that experiment values take precedence over defaults."""
    merged = _deep_merge(default_config, experiment_config)

    assert merged["sweeps"]["order_grid"] == [3]
    assert merged["output"]["base_path"] == "./results/filter"
    assert merged["name"] == "filter-run"

    # Defaults should still be present where not overridden
    assert merged["sweeps"]["selection_window"] == 0.5
    assert merged["output"]["write_steps"] is True
    assert merged["realizations"] == 10

    # Lists are replaced, not merged
    assert merged["learners"] == [{"kind": "adaogf"}]


def test_deep_merge_empty_override(default_config):
    """Test deep merge with empty override."""
    assert _deep_merge(default_config, {}) == default_config


def test_load_config_file_not_found(temp_dir):
    """Test error on missing config."""
    with pytest.raises(FileNotFoundError):
        load_config_yml(config_path=temp_dir / "missing.yml", default_path=None)


def test_file_overrides_flags_overrides_defaults(temp_dir, default_config, experiment_config):
    """Defaults < command-line overrides < config file."""
    defaults = _write(temp_dir / "default.yml", default_config)
    config_file = _write(temp_dir / "experiment.yml", {**experiment_config, "seed": 3})

    data = load_config_data(config_file, overrides={"seed": 99, "realizations": 2}, default_path=defaults)

    assert data["seed"] == 3
    assert data["realizations"] == 2
    assert data["sweeps"]["selection_window"] == 0.5


def test_load_config_validates(temp_dir, default_config, experiment_config):
    """Test that a merged config loads into the pydantic models."""
    defaults = _write(temp_dir / "default.yml", default_config)
    config_file = _write(temp_dir / "experiment.yml", experiment_config)

    config = load_config_yml(config_file, default_path=defaults)

    assert isinstance(config, ExperimentConfig)
    assert config.data.synthetic[0].n0 == 20
    assert config.learners[0].kind == "adaogf"
    assert len(config.learners[0].rules) == 5
    assert config.learners[0].eta_grid == DEFAULT_ETA_GRID
    assert config.sweeps.order_grid == [3]


def test_invalid_config_raises_configuration_error(temp_dir):
    """Validation errors surface as ConfigurationError."""
    config_file = _write(
        temp_dir / "bad.yml",
        {"data": {"synthetic": [{"n0": 5}]}, "learners": [{"kind": "dogf", "eta_grid": [-1.0]}]},
    )
    with pytest.raises(ConfigurationError):
        load_config_yml(config_file, default_path=None)


def test_invalid_yaml(temp_dir):
    """Malformed YAML is a configuration error."""
    config_file = temp_dir / "broken.yml"
    config_file.write_text("learners: [unclosed\n")
    with pytest.raises(ConfigurationError):
        load_config_yml(config_file, default_path=None)


def test_config_requires_data_and_learners():
    """A config without any dataset or learner is rejected."""
    with pytest.raises(ValueError):
        ExperimentConfig(data={}, learners=[{"kind": "dogf"}])
    with pytest.raises(ValueError):
        ExperimentConfig(data={"stream_paths": ["x"]}, learners=[])


def test_learner_labels_must_be_unique():
    """Two learners of one kind need distinct names."""
    data = {"stream_paths": ["x"]}
    with pytest.raises(ValueError):
        ExperimentConfig(data=data, learners=[{"kind": "adaogf"}, {"kind": "adaogf"}])

    config = ExperimentConfig(
        data=data, learners=[{"kind": "adaogf"}, {"kind": "adaogf", "name": "ada2ogf", "learn_weights": False}]
    )
    assert [lc.label for lc in config.learners] == ["adaogf", "ada2ogf"]


def test_learner_for_falls_back_to_defaults():
    """Audited kinds without a configured learner get default settings."""
    config = ExperimentConfig(data={"stream_paths": ["x"]}, learners=[{"kind": "dogf", "eta_grid": [0.1]}])
    assert config.learner_for("dogf").eta_grid == [0.1]
    assert config.learner_for("sogf") == LearnerConfig(kind="sogf")


def test_synthetic_config_checks_sizes():
    """Bandwidth and edges per node cannot exceed the starting graph."""
    with pytest.raises(ValueError):
        SyntheticConfig(n0=3, bandwidth=4, edges_per_node=1)
    with pytest.raises(ValueError):
        SyntheticConfig(n0=3, bandwidth=1, edges_per_node=4)


def test_repository_configs_load():
    """The shipped experiment configs validate against the defaults."""
    from expanding_graph_filters.config_handler.load_configs import DEFAULT_CONFIG_PATH

    configs_dir = DEFAULT_CONFIG_PATH.parent
    for name in ("synthetic-filter.yml", "audit.yml"):
        config = load_config_yml(configs_dir / name)
        assert config.learners
        assert config.data.synthetic
