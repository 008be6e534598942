#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Pruebas - Gestor de configuración y precedencia de valores
"""

import json

import pytest

from core.config_manager import DEFAULT_SEED, SEED_ENV, ConfigManager, RunConfig
from core.errors import ConfigError
from core.montecarlo import Thresholds


@pytest.fixture
def manager(tmp_path):
    return ConfigManager(str(tmp_path / "config.json"))


class TestDefaults:

    def test_default_file_is_written(self, tmp_path, manager):
        data = json.loads((tmp_path / "config.json").read_text(encoding="utf-8"))
        assert set(data["profiles"]) == {"acceptance", "rapido"}
        assert data["thresholds"]["ks_normal"] == 0.02
        assert manager.get_app_setting("output_dir") == "reportes"

    def test_in_memory_only(self, tmp_path):
        ConfigManager(str(tmp_path / "otro.json"), save_default=False)
        assert not (tmp_path / "otro.json").exists()

    def test_thresholds_with_overrides(self, manager):
        th = manager.get_thresholds({"ks_normal": 0.03})
        assert th.ks_normal == 0.03
        assert th.eta == Thresholds().eta

    def test_newer_schema_is_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"schema_version": "2.0"}), encoding="utf-8")
        with pytest.raises(ConfigError):
            ConfigManager(str(path))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{no es json", encoding="utf-8")
        with pytest.raises(ConfigError):
            ConfigManager(str(path))


class TestProfiles:

    def test_validate_profile(self, manager):
        assert manager.validate_profile(manager.get_profile("rapido")) == []
        errors = manager.validate_profile({"samples": 0, "paths": 10, "bit_length": 32,
                                           "seed": -1, "workers": True})
        assert len(errors) == 4

    def test_save_profile(self, manager):
        profile = dict(manager.get_profile("rapido"), samples=500)
        assert manager.save_profile("mini", profile)
        assert ConfigManager(str(manager.config_file)).get_profile("mini")["samples"] == 500

    def test_save_invalid_profile(self, manager):
        with pytest.raises(ConfigError):
            manager.save_profile("malo", {"samples": 10})


class TestPrecedence:

    def test_profile_values(self, manager):
        config = manager.build_run_config("verify", "rapido", environ={})
        assert config.samples == 2_000 and config.seed == DEFAULT_SEED
        assert config.profile == "rapido"

    def test_environment_seed(self, manager):
        config = manager.build_run_config("verify", environ={SEED_ENV: "99"})
        assert config.seed == 99

    def test_bad_environment_seed(self, manager):
        with pytest.raises(ConfigError):
            manager.build_run_config("verify", environ={SEED_ENV: "siete"})

    def test_config_file_over_environment(self, tmp_path, manager):
        stored = RunConfig(command="eval", seed=11, samples=300)
        path = tmp_path / "run.json"
        stored.save(str(path))
        config = manager.build_run_config("verify", config_path=str(path),
                                          environ={SEED_ENV: "99"})
        assert config.seed == 11 and config.samples == 300
        assert config.command == "verify"

    def test_options_over_everything(self, tmp_path, manager):
        path = tmp_path / "run.json"
        RunConfig(command="verify", seed=11).save(str(path))
        config = manager.build_run_config("verify", config_path=str(path),
                                          overrides={"seed": 5, "samples": None},
                                          environ={SEED_ENV: "99"})
        assert config.seed == 5
        assert config.samples == RunConfig(command="verify").samples

    def test_profile_from_overrides(self, manager):
        config = manager.build_run_config("verify", overrides={"profile": "rapido"}, environ={})
        assert config.paths == 20

    def test_unknown_profile(self, manager):
        with pytest.raises(ConfigError, match="desconocido"):
            manager.build_run_config("verify", "inexistente", environ={})


class TestRunConfig:

    def test_round_trip(self, tmp_path):
        config = RunConfig(command="verify", suite="clt", N=[1000], thresholds={"ks_normal": 0.03})
        path = tmp_path / "run.json"
        config.save(str(path))
        assert RunConfig.load(str(path)) == config

    def test_unknown_keys(self):
        with pytest.raises(ConfigError, match="desconocidas"):
            RunConfig.from_dict({"command": "eval", "semilla": 3})

    def test_missing_command(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"seed": 3})

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig.load(str(tmp_path / "no_existe.json"))
