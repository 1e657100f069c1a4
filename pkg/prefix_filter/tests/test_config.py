import json

import pytest

from prefix_filter.core.prefix_filter import PrefixFilter
from prefix_filter.utils import config
from prefix_filter.utils.config import DEFAULTS, ConfigManager


@pytest.fixture
def isolated_manager(tmp_path, monkeypatch):
    manager = ConfigManager(str(tmp_path / "config.json"))
    monkeypatch.setattr(config, "config_manager", manager)
    return manager


def test_defaults_without_file(tmp_path):
    manager = ConfigManager(str(tmp_path / "missing.json"))
    assert manager.config == DEFAULTS
    assert not (tmp_path / "missing.json").exists()


def test_file_overrides_defaults(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"max_load_factor": 0.9, "spare_kind": "exact"}))
    manager = ConfigManager(str(path))
    assert manager.config["max_load_factor"] == 0.9
    assert manager.config["spare_kind"] == "exact"
    assert manager.config["bin_capacity"] == 25


def test_env_var_selects_file(tmp_path, monkeypatch):
    path = tmp_path / "env.json"
    path.write_text(json.dumps({"bench_rounds": 10}))
    monkeypatch.setenv(config.CONFIG_ENV_VAR, str(path))
    assert ConfigManager().config["bench_rounds"] == 10


def test_non_object_file_is_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2]")
    with pytest.raises(ValueError):
        ConfigManager(str(path))


def test_set_config_persists(isolated_manager):
    config.set_config("spare_kind", "exact")
    assert config.get_config("spare_kind") == "exact"
    assert json.loads(open(isolated_manager.config_file).read())["spare_kind"] == "exact"
    isolated_manager.reset()
    assert config.get_config("spare_kind") == "bbf"


def test_new_filter_reads_config(isolated_manager):
    isolated_manager.config.update({"max_load_factor": 1.0, "spare_kind": "exact"})
    pf = PrefixFilter.new(2_500)
    assert pf.params.m == 100
    assert pf.spare_kind == "exact"


def test_worst_case_sizing_gives_a_larger_spare(isolated_manager):
    expected = PrefixFilter.new(100_000, 0.95, "exact").spare.capacity
    isolated_manager.config["spare_sizing"] = "worst_case"
    worst = PrefixFilter.new(100_000, 0.95, "exact").spare.capacity
    assert worst > expected
