"""
Dense numerical kernels shared by the graph and convolutional models:
matrix product with shape checks, the leaky-ReLU activation and the
mean-squared-error losses, each with its gradient.

Everything works on float64 numpy arrays.
"""

from typing import Tuple

import numpy as np

from iceemu.common.errors import ShapeError

DEFAULT_SLOPE = 0.01


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float64 array with positive dimensions."""
    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 2 or 0 in array.shape:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ShapeError(f"{name} contains non-finite values")
    return array


def matmul(a, b) -> np.ndarray:
    """
    Matrix product.

    :raises ShapeError: If the inner dimensions differ
    """
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def leaky_relu(x, slope: float = DEFAULT_SLOPE):
    values = np.asarray(x, dtype=np.float64)
    out = np.where(values >= 0, values, slope * values)
    return float(out) if out.ndim == 0 else out


def leaky_relu_grad(x, slope: float = DEFAULT_SLOPE):
    """Derivative of leaky_relu; 1 at exactly zero."""
    values = np.asarray(x, dtype=np.float64)
    out = np.where(values >= 0, 1.0, slope)
    return float(out) if out.ndim == 0 else out


def mse(pred, target) -> Tuple[float, np.ndarray]:
    """
    Mean squared error over all entries.

    :return: (loss, gradient with respect to pred)
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"prediction shape {pred.shape} differs from target shape {target.shape}")
    diff = pred - target
    count = diff.size
    return float(np.sum(diff * diff) / count), 2.0 * diff / count


def masked_mse(pred, target, mask) -> Tuple[float, np.ndarray]:
    """
    Mean squared error over the entries selected by mask.

    pred and target are channel-first (C, ny, nx); mask is (ny, nx) and is
    shared by every channel. Masked-out entries get zero gradient.
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if pred.shape != target.shape or pred.shape[1:] != mask.shape:
        raise ShapeError(f"shapes do not line up: pred {pred.shape}, target {target.shape}, mask {mask.shape}")
    count = pred.shape[0] * int(mask.sum())
    if count == 0:
        raise ShapeError("mask selects no cells")
    diff = np.where(mask[None], pred - target, 0.0)
    return float(np.sum(diff * diff) / count), 2.0 * diff / count
