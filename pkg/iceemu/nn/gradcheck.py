"""
Central-difference verification of analytic gradients.
"""

from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

LossFn = Callable[[List[np.ndarray]], Tuple[float, List[np.ndarray]]]


def finite_diff_check(
    loss_fn: LossFn,
    params: Sequence[np.ndarray],
    sample_count: int = 50,
    h: float = 1e-5,
    seed: int = 0,
    param_index: Optional[int] = None,
) -> float:
    """
    Compare analytic gradients with central differences on random coordinates.

    :param loss_fn: Maps the parameter list to (loss, gradients aligned with params)
    :param params: Parameter arrays; perturbed in place and restored
    :param sample_count: Number of coordinates to sample (all of them if fewer exist)
    :param h: Finite-difference step
    :param seed: Seed for choosing coordinates
    :param param_index: Restrict samples to one parameter array
    :return: Max relative error, with denominator max(|analytic|, |numeric|, 1e-12)
    """
    params = list(params)
    _, grads = loss_fn(params)
    grads = [np.array(g, dtype=np.float64) for g in grads]

    candidates = [param_index] if param_index is not None else range(len(params))
    slots = [(p, k) for p in candidates for k in range(params[p].size)]
    rng = np.random.default_rng(seed)
    if sample_count < len(slots):
        chosen = rng.choice(len(slots), size=sample_count, replace=False)
        slots = [slots[i] for i in sorted(chosen)]

    worst = 0.0
    for p, k in slots:
        flat = params[p].reshape(-1)
        original = flat[k]
        flat[k] = original + h
        plus, _ = loss_fn(params)
        flat[k] = original - h
        minus, _ = loss_fn(params)
        flat[k] = original
        numeric = (plus - minus) / (2.0 * h)
        analytic = grads[p].reshape(-1)[k]
        error = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)
        worst = max(worst, error)
    return worst
