import numpy as np
import pytest

from iceemu.common.errors import ConfigError, SplitError
from iceemu.oracle.dataset import generate_dataset
from iceemu.pipeline.split import SplitSpec, audit_split, split_frames


def test_full_protocol_sizes(mesh, oracle):
    frames = generate_dataset(mesh, oracle, np.arange(0.0, 71.0, 2.0), 240)
    train, val, test = split_frames(frames, SplitSpec())
    assert (len(train), len(val), len(test)) == (6720, 960, 960)
    assert test.rates.tolist() == [0.0, 20.0, 40.0, 60.0]
    assert val.rates.tolist() == [10.0, 30.0, 50.0, 70.0]
    assert len(train.rates) == 28


def test_partitions_are_disjoint_and_cover(frames):
    train, val, test = split_frames(frames, SplitSpec())
    assert sorted(train.rates.tolist() + val.rates.tolist() + test.rates.tolist()) == frames.rates.tolist()
    assert train.rates.tolist() == [5.0, 15.0, 25.0]
    assert val.rates.tolist() == [10.0]
    assert test.rates.tolist() == [0.0, 20.0]


def test_months_travel_with_their_rate(frames):
    train, _, _ = split_frames(frames, SplitSpec())
    assert train.months == frames.months
    np.testing.assert_array_equal(train.series(15.0), frames.series(15.0))


def test_empty_train_is_an_error(mesh, oracle):
    frames = generate_dataset(mesh, oracle, [0.0, 10.0, 20.0, 30.0], 2)
    with pytest.raises(SplitError, match="no training rates"):
        split_frames(frames, SplitSpec())


def test_overlapping_spec_rejected():
    with pytest.raises(ConfigError):
        SplitSpec(validation_rates=(10.0, 20.0), test_rates=(20.0,))


def test_split_is_deterministic(frames):
    first = split_frames(frames, SplitSpec())
    second = split_frames(frames, SplitSpec())
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.fields, b.fields)


def test_audit_detects_shared_rate(frames):
    with pytest.raises(SplitError):
        audit_split(frames.subset([5.0, 10.0]), frames.subset([10.0]), frames.subset([0.0]))
