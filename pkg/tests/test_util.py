import numpy as np
import pytest

from iceemu.common.util import area_weighted_mean, format_float, format_row, fsum_mean


def test_fsum_mean():
    assert fsum_mean([1.0, 2.0, 3.0, 4.0]) == 2.5

    # Order does not matter, even with cancellation
    values = [1e16, 1.0, -1e16, 3.0]
    assert fsum_mean(values) == fsum_mean(values[::-1]) == 1.0

    with pytest.raises(ValueError) as exc_info:
        fsum_mean([])
    assert str(exc_info.value) == "Cannot average an empty sequence."


def test_area_weighted_mean():
    assert area_weighted_mean(np.array([1.0, 3.0]), np.array([3.0, 1.0])) == 1.5

    with pytest.raises(ValueError):
        area_weighted_mean(np.array([1.0, 2.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        area_weighted_mean(np.array([1.0]), np.array([0.0]))


def test_format_float_round_trips():
    for value in (0.1, 1 / 3, 1e-300, 123456789.125):
        assert float(format_float(value)) == value
    assert format_float(np.float64(2.5)) == "2.5"


def test_format_row():
    assert format_row(["gcn", 3, 0.25, np.float64(1.5), ""]) == ["gcn", 3, "0.25", "1.5", ""]
