import pytest

from iceemu.common.errors import (
    ArtifactError,
    ConfigError,
    DivergenceError,
    GradientCheckError,
    IceEmuError,
    MeshError,
    SplitError,
    StabilityError,
    ValidationError,
)


@pytest.mark.parametrize(
    "error, code",
    [
        (ConfigError("bad"), 2),
        (ValidationError("bad"), 3),
        (MeshError("bad"), 3),
        (SplitError("bad"), 3),
        (ArtifactError("bad"), 3),
        (StabilityError("bad"), 4),
        (GradientCheckError("bad"), 4),
        (DivergenceError(7, float("nan")), 4),
    ],
)
def test_exit_codes(error, code):
    assert isinstance(error, IceEmuError)
    assert error.exit_code == code


def test_validation_error_names_the_row():
    error = ValidationError("non-finite value", row=12)
    assert str(error) == "row 12: non-finite value"
    assert error.row == 12


def test_divergence_error_carries_epoch():
    error = DivergenceError(3, float("inf"))
    assert error.epoch == 3
    assert "epoch 3" in str(error)


def test_config_error_is_value_error():
    with pytest.raises(ValueError):
        raise ConfigError("width must be positive")
