import numpy as np
import pytest

from iceemu.common.errors import NormalizationError
from iceemu.pipeline.normalization import NormStats, fit_normalization


def _all_inputs(frames):
    return np.concatenate([frames.inputs(r, month) for r, month in frames.index_pairs()])


def test_round_trip(train_frames):
    norm = fit_normalization(train_frames)
    inputs = _all_inputs(train_frames)
    np.testing.assert_allclose(norm.denormalize_inputs(norm.normalize_inputs(inputs)), inputs, rtol=1e-12, atol=1e-12)
    targets = train_frames.fields.reshape(-1, 3)
    np.testing.assert_allclose(
        norm.denormalize_targets(norm.normalize_targets(targets)), targets, rtol=1e-12, atol=1e-9
    )


def test_normalized_training_data_is_standard(train_frames):
    norm = fit_normalization(train_frames)
    inputs = norm.normalize_inputs(_all_inputs(train_frames))
    targets = norm.normalize_targets(train_frames.fields.reshape(-1, 3))
    for values in (inputs, targets):
        np.testing.assert_allclose(values.mean(axis=0), 0.0, atol=1e-9)
        np.testing.assert_allclose(values.std(axis=0), 1.0, atol=1e-9)


def test_constant_rate_rejected(frames):
    with pytest.raises(NormalizationError, match="'m'"):
        fit_normalization(frames.subset([5.0]))


def test_empty_set_rejected(frames):
    with pytest.raises(NormalizationError):
        fit_normalization(frames.subset([]))


def test_arrays_round_trip(train_frames):
    norm = fit_normalization(train_frames)
    restored = NormStats.from_arrays(norm.to_arrays())
    for name, values in norm.to_arrays().items():
        np.testing.assert_array_equal(restored.to_arrays()[name], values)


def test_missing_array_rejected(train_frames):
    arrays = fit_normalization(train_frames).to_arrays()
    del arrays["output_std"]
    with pytest.raises(NormalizationError, match="output_std"):
        NormStats.from_arrays(arrays)
