"""
Partitioning of frame sets by melting rate. All months of a rate stay in
the same partition.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from iceemu.common.errors import ConfigError, SplitError
from iceemu.oracle.frames import FrameSet

RATE_TOLERANCE = 1e-9


def _matches(rates: np.ndarray, chosen: Sequence[float]) -> np.ndarray:
    if len(chosen) == 0:
        return np.zeros(len(rates), dtype=bool)
    return np.isclose(rates[:, None], np.asarray(chosen, dtype=np.float64)[None, :], rtol=0, atol=RATE_TOLERANCE).any(
        axis=1
    )


@dataclass(frozen=True)
class SplitSpec:
    validation_rates: Tuple[float, ...] = (10.0, 30.0, 50.0, 70.0)
    test_rates: Tuple[float, ...] = (0.0, 20.0, 40.0, 60.0)

    def __post_init__(self):
        object.__setattr__(self, "validation_rates", tuple(float(r) for r in self.validation_rates))
        object.__setattr__(self, "test_rates", tuple(float(r) for r in self.test_rates))
        overlap = _matches(np.array(self.validation_rates), self.test_rates)
        if overlap.any():
            rate = self.validation_rates[int(np.argmax(overlap))]
            raise ConfigError(f"rate {rate} is both a validation and a test rate")


def split_frames(frames: FrameSet, spec: SplitSpec) -> Tuple[FrameSet, FrameSet, FrameSet]:
    """
    Split a frame set into (train, validation, test) by melting rate.

    Rates named in neither set go to training. Validation or test may come out
    empty when the frame set lacks their rates.

    :raises SplitError: If no rate is left for training
    """
    test = _matches(frames.rates, spec.test_rates)
    val = _matches(frames.rates, spec.validation_rates) & ~test
    train = ~(test | val)
    if not train.any():
        raise SplitError(
            f"no training rates left: rates {frames.rates.tolist()} are all validation or test rates"
        )
    parts = tuple(frames.subset(frames.rates[selected]) for selected in (train, val, test))
    audit_split(*parts)
    return parts


def audit_split(train: FrameSet, val: FrameSet, test: FrameSet):
    """
    :raises SplitError: If any rate appears in two partitions
    """
    for name, other in (("validation", val), ("test", test)):
        if _matches(train.rates, other.rates).any():
            raise SplitError(f"training and {name} partitions share a melting rate")
    if _matches(val.rates, test.rates).any():
        raise SplitError("validation and test partitions share a melting rate")
