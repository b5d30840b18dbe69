"""
Stride-1, zero same-padded 2-D cross-correlation with its exact reverse pass.

Inputs are channel-first (C_in, ny, nx); kernels are (C_out, C_in, k, k) with
odd k. The forward pass unfolds the padded input into columns with
`sliding_window_view` and multiplies once; the backward pass folds the
column gradient back.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from iceemu.common.errors import ShapeError


@dataclass
class Conv2dCache:
    columns: np.ndarray
    input_shape: Tuple[int, int, int]
    kernel: np.ndarray


def _check(x: np.ndarray, kernel: np.ndarray):
    if x.ndim != 3:
        raise ShapeError(f"input must be (C, ny, nx), got shape {x.shape}")
    if kernel.ndim != 4 or kernel.shape[2] != kernel.shape[3] or kernel.shape[2] % 2 == 0:
        raise ShapeError(f"kernel must be (C_out, C_in, k, k) with odd k, got shape {kernel.shape}")
    if kernel.shape[1] != x.shape[0]:
        raise ShapeError(f"kernel expects {kernel.shape[1]} input channels, input has {x.shape[0]}")


def conv2d_forward(x, kernel, bias: Optional[np.ndarray] = None) -> Tuple[np.ndarray, Conv2dCache]:
    """
    :param x: Input, shape (C_in, ny, nx)
    :param kernel: Weights, shape (C_out, C_in, k, k)
    :param bias: Optional per-output-channel bias, shape (C_out,)
    :return: (output of shape (C_out, ny, nx), cache for the backward pass)
    """
    x = np.asarray(x, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    _check(x, kernel)
    c_in, ny, nx = x.shape
    k = kernel.shape[2]
    pad = k // 2
    padded = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(padded, (k, k), axis=(1, 2))  # (C_in, ny, nx, k, k)
    columns = windows.transpose(0, 3, 4, 1, 2).reshape(c_in * k * k, ny * nx)
    out = kernel.reshape(kernel.shape[0], -1) @ columns
    if bias is not None:
        out += np.asarray(bias, dtype=np.float64)[:, None]
    return out.reshape(kernel.shape[0], ny, nx), Conv2dCache(columns, x.shape, kernel)


def conv2d_backward(cache: Conv2dCache, upstream) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    :param cache: Cache from `conv2d_forward`
    :param upstream: Gradient with respect to the output, shape (C_out, ny, nx)
    :return: (gradient for the input, the kernel, the bias)
    """
    c_in, ny, nx = cache.input_shape
    kernel = cache.kernel
    c_out, k = kernel.shape[0], kernel.shape[2]
    pad = k // 2
    flat = np.asarray(upstream, dtype=np.float64).reshape(c_out, ny * nx)

    d_kernel = (flat @ cache.columns.T).reshape(kernel.shape)
    d_bias = flat.sum(axis=1)
    d_columns = (kernel.reshape(c_out, -1).T @ flat).reshape(c_in, k, k, ny, nx)
    d_padded = np.zeros((c_in, ny + 2 * pad, nx + 2 * pad))
    for di in range(k):
        for dj in range(k):
            d_padded[:, di : di + ny, dj : dj + nx] += d_columns[:, di, dj]
    return d_padded[:, pad : pad + ny, pad : pad + nx], d_kernel, d_bias
