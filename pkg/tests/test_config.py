import pytest

from config.settings import build_run_config, load_run_config, parse_key_values
from core.errors import ConfigError


def test_parse_key_values_folds_dotted_keys():
    data = parse_key_values(["problem = shocktube  # comment", "", "limiter.lambda_self = 10", "limiter.enabled = off"])
    assert data == {"problem": "shocktube", "limiter": {"lambda_self": "10", "enabled": False}}


def test_line_without_equals_is_rejected():
    with pytest.raises(ConfigError):
        parse_key_values(["problem shocktube"])


def test_switches_and_formats_are_coerced():
    config = build_run_config({"problem": "alfven2.5d", "nx": "16", "corrector": "off",
                               "output_formats": "csv, vtk"})
    assert config.nx == 16
    assert config.corrector is False
    assert config.output_formats == ["csv", "vtk"]


def test_missing_required_key_names_it():
    with pytest.raises(ConfigError) as info:
        build_run_config({"problem": "alfven2.5d"})
    assert info.value.key == "nx"


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError) as info:
        build_run_config({"problem": "alfven2.5d", "nx": "8", "flux": "hll"})
    assert info.value.key == "flux"


def test_invalid_value_names_the_nested_key():
    with pytest.raises(ConfigError) as info:
        build_run_config({"problem": "alfven2.5d", "nx": "8", "limiter": {"e": "0.5"}})
    assert info.value.key == "limiter.e"


def test_load_with_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("problem = shocktube\nnx = 50\nlimiter.lambda_self = 100\n")
    config = load_run_config(path, ["nx=100", "limiter.e=2"])
    assert config.nx == 100
    assert config.limiter.lambda_self == 100.0
    assert config.limiter.e == 2.0


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.cfg")
