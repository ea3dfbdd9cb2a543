"""Tests for settings and run configuration."""

import pytest

from fhm_lab.config import Settings, get_settings
from fhm_lab.errors import ConfigError
from fhm_lab.pipeline import RunConfig, load_config, parse_overrides, validate_config


def test_settings_defaults():
    settings = Settings()
    assert settings.log_level == "INFO"
    assert settings.float_format == "%.17g"


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("FHM_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("FHM_LOG_JSON", "true")
    settings = Settings()
    assert settings.log_level == "DEBUG"
    assert settings.log_json is True
    assert get_settings() is get_settings()


def test_empty_config_uses_defaults():
    cfg = validate_config({})
    assert isinstance(cfg, RunConfig)
    assert cfg.integrand.p == 2.0
    assert cfg.domain.kind == "disk"
    assert cfg.mesh.h_max == 0.1


@pytest.mark.parametrize(
    "data, where",
    [
        ({"integrand": {"p": 1.0}}, "integrand.p"),
        ({"integrand": {"kind": "quadratic-form"}}, "integrand"),
        ({"integrand": {"kind": "quadratic-form", "matrix": [[1.0, 2.0], [2.0, 1.0]]}}, "integrand"),
        ({"integrand": {"kind": "sampled-profile", "profile_file": "nowhere.txt"}}, "integrand"),
        ({"domain": {"kind": "custom", "vertices": [[0.0, 0.0], [1.0, 0.0]]}}, "domain"),
        ({"mesh": {"min_angle": 15.0}}, "mesh.min_angle"),
        ({"solve": {"epsilon_schedule": [0.1, 0.5]}}, "solve.epsilon_schedule"),
        ({"analysis": {"t_grid": [0.6]}}, "analysis.t_grid"),
        ({"analysis": {"gauge_A": [-1.0]}}, "analysis.gauge_A"),
        ({"analysis": {"exceptional_levels": [0.2]}}, "analysis.exceptional_levels"),
        ({"surprise": 1}, "surprise"),
    ],
)
def test_invalid_blocks_name_their_location(data, where):
    with pytest.raises(ConfigError, match=where):
        validate_config(data)


def test_parse_overrides_reads_toml_values():
    out = parse_overrides(["tolerance=1e-8", "epsilon_schedule = [0.5, 0.0]", "max_newton=20"])
    assert out == {"tolerance": 1e-8, "epsilon_schedule": [0.5, 0.0], "max_newton": 20}
    with pytest.raises(ConfigError):
        parse_overrides(["tolerance"])
    with pytest.raises(ConfigError):
        parse_overrides(["tolerance=1e-8e"])


def test_load_config_resolves_profile_next_to_config(tmp_path):
    (tmp_path / "profile.txt").write_text("\n".join(["1.0"] * 64) + "\n")
    path = tmp_path / "run.toml"
    path.write_text('[integrand]\nkind = "sampled-profile"\np = 3.0\nprofile_file = "profile.txt"\n')
    cfg = load_config(path, overrides=["max_newton=7"], output_dir=tmp_path / "out", seed=3)
    assert cfg.integrand.profile_file == tmp_path / "profile.txt"
    assert cfg.solve.max_newton == 7
    assert cfg.output_dir == tmp_path / "out"
    assert cfg.seed == 3


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    broken = tmp_path / "broken.toml"
    broken.write_text("[mesh\nh_max = 0.1\n")
    with pytest.raises(ConfigError):
        load_config(broken)


def test_solve_block_builds_options():
    cfg = validate_config({"solve": {"epsilon_schedule": [0.5, 0.0], "damping": [1.0, 0.5]}})
    opts = cfg.solve.to_options()
    assert opts.epsilon_schedule == (0.5, 0.0)
    assert opts.damping == (1.0, 0.5)
