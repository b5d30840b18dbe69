import math

import numpy as np
import pytest

from iceemu.common.errors import ConfigError
from iceemu.nn.adam import AdamState, adam_step


def test_first_step_moves_by_learning_rate():
    params = [np.array([1.0, -2.0, 0.5])]
    grads = [np.array([3.0, -0.2, 1e-3])]
    adam_step(params, grads, AdamState(learning_rate=0.01))
    assert params[0] == pytest.approx([0.99, -1.99, 0.49], abs=1e-7)


def test_zero_gradient_leaves_params():
    params = [np.array([[1.0, 2.0]])]
    state = AdamState()
    adam_step(params, [np.zeros((1, 2))], state)
    assert params[0].tolist() == [[1.0, 2.0]]
    assert state.step == 1


def test_zero_learning_rate_is_identity():
    rng = np.random.default_rng(0)
    params = [rng.normal(size=(3, 3))]
    before = params[0].copy()
    state = AdamState(learning_rate=0.0)
    for _ in range(3):
        adam_step(params, [rng.normal(size=(3, 3))], state)
    assert np.array_equal(params[0], before)


def test_two_steps_match_hand_computation():
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    theta = 1.0
    m = v = 0.0
    for step, g in enumerate((0.5, -0.25), start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta -= lr * (m / (1 - b1**step)) / (math.sqrt(v / (1 - b2**step)) + eps)

    params = [np.array([1.0])]
    state = AdamState(learning_rate=lr)
    adam_step(params, [np.array([0.5])], state)
    adam_step(params, [np.array([-0.25])], state)
    assert params[0][0] == pytest.approx(theta, rel=1e-14)
    assert state.step == 2


def test_negative_learning_rate_is_rejected():
    with pytest.raises(ConfigError):
        AdamState(learning_rate=-0.1)
