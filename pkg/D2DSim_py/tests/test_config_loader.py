import os

import pytest

from core.exceptions import ConfigParseError, ConfigValidationError
from models.experiment import ExperimentConfig
from utils.config_loader import build_config, load_config, load_overrides, parse_config_text, to_flat

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")


def _from_text(text: str) -> ExperimentConfig:
    return build_config(parse_config_text(text))


def test_empty_text_gives_reference_defaults():
    config = _from_text("")
    assert config.cell.num_cues == 30
    assert config.env.tau_db == 6.0
    assert config.rl.learning_rate == 0.001
    assert config.rl.discount == 0.95
    assert config.rl.epsilon == 0.1
    assert config.radio.p_max_dbm == 23.0
    assert config.algorithms == ["dqn", "max_power", "olpc"]


def test_values_are_typed():
    config = _from_text("tau_db = 6\nnum_cues = 10\nshared_network = no\n")
    assert config.env.tau_db == 6.0 and isinstance(config.env.tau_db, float)
    assert config.cell.num_cues == 10
    assert config.rl.shared_network is False


def test_list_keys_and_alias():
    config = _from_text("hidden_layers = 64, 64\nalgorithm = olpc, dqn\nd2d_counts = 2,4\nseeds = 3\n")
    assert config.rl.hidden_layers == [64, 64]
    assert config.algorithms == ["olpc", "dqn"]
    assert config.d2d_counts == [2, 4]
    assert config.seeds == [3]


def test_comments_and_blank_lines_are_ignored():
    values = parse_config_text("# header\n\nnum_cues = 10  # inline\n\n")
    assert values == {"num_cues": "10"}


def test_unparsable_line_reports_its_number():
    with pytest.raises(ConfigParseError) as exc_info:
        parse_config_text("# header\n\nnum_cues = 10\nnot valid\n", "exp.conf")
    assert exc_info.value.line == 4
    assert str(exc_info.value).startswith("exp.conf:4:")


def test_duplicate_key_reports_second_line():
    with pytest.raises(ConfigParseError) as exc_info:
        parse_config_text("num_cues = 10\nnum_cues = 12\n")
    assert exc_info.value.line == 2
    assert "duplicate" in str(exc_info.value)


def test_key_without_value():
    with pytest.raises(ConfigParseError) as exc_info:
        parse_config_text("num_cues\n")
    assert "missing '='" in str(exc_info.value)


@pytest.mark.parametrize(
    "text, field",
    [
        ("cell_radius_m = -5\n", "cell_radius_m"),
        ("warp_factor = 9\n", "warp_factor"),
        ("min_power_dbm = 30\n", "min_power_dbm"),
        ("replay_capacity = 10\nbatch_size = 64\n", "batch_size"),
        ("algorithms = dqn, genetic\n", "algorithms"),
        ("epsilon = 1.5\n", "epsilon"),
    ],
)
def test_invalid_values_name_the_field(text, field):
    with pytest.raises(ConfigValidationError) as exc_info:
        _from_text(text)
    assert exc_info.value.field == field


def test_load_config_from_file(tmp_path):
    path = tmp_path / "small.conf"
    path.write_text("num_cues = 8\nepisodes = 12\nd2d_counts = 2, 3\n", encoding="utf-8")
    config = load_config(str(path))
    assert config.cell.num_cues == 8
    assert config.env.episodes == 12
    assert config.d2d_counts == [2, 3]


def test_load_config_reports_path_and_line(tmp_path):
    path = tmp_path / "broken.conf"
    path.write_text("num_cues = 8\n\nthis is wrong\n", encoding="utf-8")
    with pytest.raises(ConfigParseError) as exc_info:
        load_config(str(path))
    assert f"{path}:3:" in str(exc_info.value)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_config(str(tmp_path / "absent.conf"))


def test_shipped_configs_parse():
    reference = load_config(os.path.join(CONFIG_DIR, "reference_defaults.conf"))
    assert reference == ExperimentConfig(output_path="reference_defaults.csv")

    desk = load_config(os.path.join(CONFIG_DIR, "desk_scale.conf"))
    assert desk.cell.num_cues == 10
    assert desk.rl.hidden_layers == [64, 64]


def test_overrides_keep_base_values():
    base = build_config({"num_cues": 10, "episodes": 40})
    config = load_overrides({"episodes": 5, "seeds": [1, 2], "model_dir": None}, base)
    assert config.cell.num_cues == 10
    assert config.env.episodes == 5
    assert config.seeds == [1, 2]


def test_flat_form_rebuilds_the_same_config():
    config = _from_text("num_cues = 12\nhidden_layers = 8\nalgorithms = olpc\n")
    assert build_config(to_flat(config)) == config


def test_overrides_reject_unknown_keys():
    with pytest.raises(ConfigValidationError):
        load_overrides({"nonsense": 1})
