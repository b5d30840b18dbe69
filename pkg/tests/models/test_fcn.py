import numpy as np
import pytest

from iceemu.common.errors import ConfigError
from iceemu.models.fcn import FcnConfig, FcnModel, init_params
from iceemu.models.suites import run_gradcheck_suites
from iceemu.nn.gradcheck import finite_diff_check
from iceemu.common.io_interface import TestIOInterface


def test_default_shapes():
    params = init_params(FcnConfig())
    assert [layer.weight.shape for layer in params] == [(128, 4, 3, 3)] + [(128, 128, 3, 3)] * 4 + [(3, 128, 3, 3)]
    assert all(layer.bias.shape == (layer.weight.shape[0],) for layer in params)


def test_config_validation():
    with pytest.raises(ConfigError):
        FcnConfig(kernel_size=4)
    with pytest.raises(ConfigError):
        FcnConfig(num_conv_layers=1)


def test_zero_weights_give_bias_map():
    config = FcnConfig(hidden_width=4, num_conv_layers=3)
    params = init_params(config)
    for array in params.arrays():
        array[...] = 0.0
    params.layers[-1].bias[:] = [0.5, -1.0, 2.0]
    out = FcnModel(config, params).forward(np.random.default_rng(0).normal(size=(4, 5, 7)))
    assert out.shape == (3, 5, 7)
    for channel, value in enumerate([0.5, -1.0, 2.0]):
        assert np.all(out[channel] == value)


def test_last_layer_is_linear():
    config = FcnConfig(hidden_width=4, num_conv_layers=2)
    params = init_params(config)
    for array in params.arrays():
        array[...] = 0.0
    params.layers[-1].bias[:] = [-3.0, -3.0, -3.0]
    out = FcnModel(config, params).forward(np.ones((4, 3, 3)))
    assert np.all(out == -3.0)


def test_masked_loss_ignores_invalid_targets():
    model = FcnModel(FcnConfig(hidden_width=4, num_conv_layers=3))
    rng = np.random.default_rng(1)
    inputs, targets = rng.normal(size=(4, 6, 5)), rng.normal(size=(3, 6, 5))
    mask = np.ones((6, 5), dtype=bool)
    mask[-1] = False
    changed = targets.copy()
    changed[:, -1] = 1e3
    assert model.loss(inputs, targets, mask) == model.loss(inputs, changed, mask)


def test_full_loss_gradient():
    model = FcnModel(FcnConfig(hidden_width=4, num_conv_layers=3, seed=2))
    rng = np.random.default_rng(2)
    inputs, targets = rng.normal(size=(4, 6, 5)), rng.normal(size=(3, 6, 5))
    mask = rng.uniform(size=(6, 5)) > 0.2
    error = finite_diff_check(lambda p: model.loss_and_grad(inputs, targets, mask), model.params.arrays(), 60)
    assert error <= 1e-5


def test_gradcheck_suites_pass_and_report():
    io = TestIOInterface()
    results = run_gradcheck_suites(io_interface=io)
    suites = {result.suite for result in results}
    assert suites == {"graph_conv_layer", "dense_head", "conv2d_layer", "mse", "masked_mse", "gcn_full", "fcn_full"}
    assert all(result.passed for result in results)
    assert len(io.sent_messages) == len(results)
    assert io.contains("PASS gcn_full layer0.weight")


def test_corrupted_gradient_fails():
    results = run_gradcheck_suites(kinds=("gcn",), corrupt=True)
    failed = [result for result in results if not result.passed]
    assert [(r.suite, r.parameter) for r in failed] == [("gcn_full", "layer0.weight")]
