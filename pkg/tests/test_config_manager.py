import os

import pytest
import yaml

from deltasub.config_manager import ConfigManager, ExperimentConfig, parse_beta_grid, parse_grid
from deltasub.errors import ConfigError


def write_config(tmp_path, data) -> str:
    path = tmp_path / "config.yml"
    path.write_text(yaml.safe_dump(data, allow_unicode=True), encoding="utf-8")
    return str(path)


class TestBetaGrid:
    def test_log_grid(self):
        grid = parse_beta_grid("0.1:100:13,log")
        assert len(grid) == 13
        assert grid[0] == pytest.approx(0.1)
        assert grid[-1] == pytest.approx(100.0)
        assert grid[6] == pytest.approx(10**0.5)

    def test_linear_grid(self):
        assert parse_beta_grid("1:3:3,lin") == pytest.approx((1.0, 2.0, 3.0))

    def test_default_scale_is_log(self):
        assert parse_beta_grid("1:100:3") == pytest.approx((1.0, 10.0, 100.0))

    @pytest.mark.parametrize("text", ["1:2", "a:b:c", "0:1:5,log", "2:1:5,lin", "1:2:1,log", "1:2:3,exp"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_beta_grid(text)


class TestParameterGrid:
    def test_linear_from_zero(self):
        assert parse_grid("0:1:5") == pytest.approx((0.0, 0.25, 0.5, 0.75, 1.0))

    def test_log_needs_positive_start(self):
        with pytest.raises(ConfigError) as info:
            parse_grid("0:1:5,log")
        assert info.value.messages == ["grid 须满足 0 < start < stop: 0.0, 1.0"]

    def test_error_names_key(self):
        with pytest.raises(ConfigError) as info:
            parse_grid("1:2", key="alpha_grid")
        assert "alpha_grid" in info.value.messages[0]


class TestExperimentConfig:
    def test_defaults_valid(self):
        config = ExperimentConfig().validate()
        assert config.seed == 20190612
        assert len(config.grid()) == 13

    def test_collects_all_problems(self):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig(k=0, beta=-1.0, objective="entropy", format="xml").validate()
        assert len(info.value.messages) == 4

    def test_budget_above_ground_size(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(N=3, k=4).validate()

    def test_unknown_surrogate(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(surrogates=("entropy",)).validate()

    def test_overrides_ignore_none(self):
        config = ExperimentConfig().with_overrides(k=3, seed=None)
        assert config.k == 3
        assert config.seed == 20190612

    def test_to_dict_lists_surrogates(self):
        assert ExperimentConfig().to_dict()["surrogates"] == ["log-det"]


class TestConfigManager:
    """YAML 配置与实验预设"""

    def test_missing_file_uses_defaults(self, tmp_path):
        manager = ConfigManager(str(tmp_path / "absent.yml"))
        assert not manager.loaded_from_file()
        assert manager.get("k") == 5
        assert not os.path.exists(tmp_path / "absent.yml")

    def test_preset_overrides_global(self, tmp_path):
        path = write_config(
            tmp_path,
            {"k": 4, "experiments": [{"id": "small", "n": 3, "N": 6, "k": 2}]},
        )
        manager = ConfigManager(path)
        assert manager.loaded_from_file()
        assert manager.get("k") == 4
        assert manager.get("k", "small") == 2
        assert manager.get("k", "other") == 4
        assert manager.get_experiment_ids() == ["small"]

    def test_experiment_config_merges_overrides(self, tmp_path):
        path = write_config(tmp_path, {"experiments": [{"id": "small", "n": 3, "N": 6, "k": 2}]})
        config = ConfigManager(path).experiment_config("small", k=3, surrogates=["trace"])
        assert (config.n, config.N, config.k) == (3, 6, 3)
        assert config.surrogates == ("trace",)

    def test_builtin_sensor_preset(self, tmp_path):
        config = ConfigManager(str(tmp_path / "absent.yml")).experiment_config("sensor-select")
        assert (config.n, config.N, config.k) == (8, 20, 5)
        assert config.normalize_columns is False
        assert config.format == "json"

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            ConfigManager(write_config(tmp_path, {"budget": 3}))

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "config.yml"
        path.write_text("k: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            ConfigManager(str(path))

    def test_invalid_value_rejected(self, tmp_path):
        manager = ConfigManager(write_config(tmp_path, {"k": 50}))
        with pytest.raises(ConfigError):
            manager.experiment_config()

    def test_save_defaults_roundtrip(self, tmp_path):
        path = str(tmp_path / "nested" / "config.yml")
        ConfigManager(path).save_defaults()
        manager = ConfigManager(path)
        assert manager.loaded_from_file()
        assert manager.experiment_config() == ExperimentConfig().validate()
