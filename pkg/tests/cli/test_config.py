import pytest

from iceemu.cli.config import RunConfig, parse_rates
from iceemu.common.errors import ConfigError


def test_defaults_match_full_protocol():
    config = RunConfig.load()
    assert config.rates == [float(rate) for rate in range(0, 71, 2)]
    assert config.months == 240
    assert config.train_config("gcn").epochs == 200
    assert config.train_config("gcn").learning_rate == 0.01
    assert config.model_config("gcn").hidden_width == 128
    assert config.split_spec().test_rates == (0.0, 20.0, 40.0, 60.0)


def test_file_then_overrides(config_file, out_dir):
    config = RunConfig.load(config_file, {("run", "seed"): 7, ("run", "workers"): None})
    assert config.seed == 7
    assert config.workers == 1
    assert config.out == str(out_dir)
    assert config.months == 3
    assert config.build_mesh().num_nodes == 20


@pytest.mark.parametrize(
    "text, message",
    [
        ("[nope]\nx = 1\n", "unknown config section"),
        ("[mesh]\ncolour = red\n", "unknown config key"),
        ("[train]\nepochs = many\n", "not a valid int"),
        ("[data]\nmode = spectral\n", "unknown data mode"),
        ("[graph]\nkernel = gaussian\n", "unknown kernel"),
    ],
)
def test_bad_config_rejected(tmp_path, text, message):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(ConfigError, match=message):
        RunConfig.load(path)


def test_kernel_alias_resolves(tmp_path):
    path = tmp_path / "alias.ini"
    path.write_text("[graph]\nkernel = paper\n")
    assert RunConfig.load(path).graph_options().kernel == "inverse-exp"


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "absent.ini")


def test_written_config_reloads_identically(config_file, tmp_path):
    config = RunConfig.load(config_file)
    echoed = tmp_path / "echo.ini"
    config.write(echoed)
    again = tmp_path / "echo2.ini"
    RunConfig.load(echoed).write(again)
    assert echoed.read_text() == again.read_text()


@pytest.mark.parametrize(
    "text, expected",
    [
        ("0:10:5", [0.0, 5.0, 10.0]),
        ("0:70:2", [float(rate) for rate in range(0, 71, 2)]),
        ("1.5, 3", [1.5, 3.0]),
        ("", []),
    ],
)
def test_parse_rates(text, expected):
    assert parse_rates(text) == expected


def test_parse_rates_rejects_garbage():
    with pytest.raises(ConfigError):
        parse_rates("a, b")
    with pytest.raises(ConfigError):
        parse_rates("0:10:0")
