import math
from typing import Iterable, Sequence

import numpy as np


def fsum_mean(values: Iterable[float]) -> float:
    """
    Mean of a sequence computed with an exactly rounded sum.

    The result does not depend on the order of the values, which keeps epoch
    losses and pooled statistics reproducible under shuffling.

    :param values: The values to average
    :return: The arithmetic mean
    :raises ValueError: If the sequence is empty
    """
    values = list(values)
    if not values:
        raise ValueError("Cannot average an empty sequence.")
    return math.fsum(values) / len(values)


def area_weighted_mean(values: np.ndarray, areas: np.ndarray) -> float:
    """
    Area-weighted mean of per-node values.

    :param values: Per-node values, shape (N,)
    :param areas: Per-node control-volume areas, shape (N,)
    :return: The weighted mean
    :raises ValueError: If the shapes differ or the total area is not positive
    """
    values = np.asarray(values, dtype=np.float64)
    areas = np.asarray(areas, dtype=np.float64)
    if values.shape != areas.shape:
        raise ValueError("Values and areas must have the same shape.")
    total = math.fsum(areas)
    if total <= 0:
        raise ValueError("Total area must be positive.")
    return math.fsum(values * areas) / total


def format_float(value: float) -> str:
    """Shortest round-tripping text form of a float, used for every CSV we write."""
    return repr(float(value))


def format_row(values: Sequence) -> list:
    """Format a CSV row, writing floats in their round-tripping form."""
    return [format_float(v) if isinstance(v, (float, np.floating)) else v for v in values]
