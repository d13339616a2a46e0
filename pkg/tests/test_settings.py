import json

import pytest

from StableTheta.config.settings import DEFAULT_CONFIG, ConfigManager, RunConfig
from StableTheta.exceptions import ConfigurationError


def test_defaults_without_file(tmp_path):
    manager = ConfigManager(str(tmp_path / "missing.json"))
    assert manager.get("budget") == 10**9
    assert manager.get_schedule_settings()["t_schedule"] == [1e2, 1e3, 1e4]
    assert manager.get_tolerance_settings()["operator_tolerance"] == 1e-6


def test_file_values_are_merged_over_defaults(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"budget": 5000, "workers": 2}))
    manager = ConfigManager(str(path))
    assert manager.get("budget") == 5000
    assert manager.get_budget_settings()["workers"] == 2
    assert manager.get("log_level") == "WARNING"


def test_malformed_file_falls_back_to_defaults(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json")
    assert ConfigManager(str(path)).config == DEFAULT_CONFIG


def test_save_and_reset(tmp_path):
    path = tmp_path / "config.json"
    manager = ConfigManager(str(path))
    manager.update({"random_seed": 7, "cache_enabled": False})
    assert manager.save_config()
    assert ConfigManager(str(path)).get("random_seed") == 7
    manager.reset_to_defaults()
    assert manager.get("random_seed") == DEFAULT_CONFIG["random_seed"]


def test_run_config_overrides(tmp_path):
    manager = ConfigManager(str(tmp_path / "missing.json"))
    config = RunConfig.from_sources(manager, "theta", genus=2, trace_bound=4, budget=None, t_schedule=[10, 1000])
    assert (config.genus, config.trace_bound, config.budget) == (2, 4, 10**9)
    assert config.t_schedule == (10.0, 1000.0)
    assert config.cache_dir == ".stabletheta_cache"


def test_cache_can_be_disabled(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"cache_enabled": False}))
    assert RunConfig.from_sources(ConfigManager(str(path)), "theta").cache_dir is None


@pytest.mark.parametrize("overrides", [
    {"trace_bound": 7},
    {"trace_bound": -2},
    {"genus": -1},
    {"genus": 5},
    {"budget": 0},
    {"workers": 0},
    {"form_label": "A1"},
    {"t_schedule": [100, 10]},
    {"v_schedule": [0, 10]},
])
def test_run_config_rejects(tmp_path, overrides):
    manager = ConfigManager(str(tmp_path / "missing.json"))
    with pytest.raises(ConfigurationError):
        RunConfig.from_sources(manager, "theta", **overrides)


def test_high_genus_needs_full_genus4(tmp_path):
    manager = ConfigManager(str(tmp_path / "missing.json"))
    assert RunConfig.from_sources(manager, "theta", genus=5, full_genus4=True).genus == 5


def test_unknown_command():
    with pytest.raises(ConfigurationError):
        RunConfig(command="plot")
