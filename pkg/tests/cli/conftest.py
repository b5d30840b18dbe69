import pytest

TINY_CONFIG = """
[mesh]
spacing_km = 50.0
jitter_fraction = 0.1

[data]
rates = 0, 5, 10, 15, 20
months = 3

[model]
hidden_width = 4
num_graph_layers = 2
num_conv_layers = 3

[train]
epochs = 2

[grid]
cells = 8

[run]
out = {out}
sweep_rates = 0, 20
bench_repetitions = 1
"""


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "run"


@pytest.fixture
def config_file(tmp_path, out_dir):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY_CONFIG.format(out=out_dir))
    return path


@pytest.fixture
def run(config_file):
    from iceemu.cli.main import main

    def invoke(*args):
        return main(["--quiet", "--config", str(config_file), *args])

    return invoke
