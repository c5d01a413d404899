"""
Convolution by patch expansion (im2col).

Patches are laid out as rows ``(b, i, j)`` and columns ``(c, ki, kj)`` so a
convolution is a linear layer applied to ``B * T`` patch rows with
``T = out_h * out_w``. The linear kernels do all of the arithmetic.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from custom_utilities.custom_exception import ShapeMismatchError
from services.nn.kernels import backprop_linear, linear_forward, param_grad
from tensor.tensor import Tensor


def conv_output_size(n: int, k: int, stride: int, pad: int) -> int:
    return (n + 2 * pad - k) // stride + 1


def im2col(x: np.ndarray, k: int, stride: int, pad: int) -> tuple[np.ndarray, int, int]:
    batch, channels, height, width = x.shape
    out_h = conv_output_size(height, k, stride, pad)
    out_w = conv_output_size(width, k, stride, pad)
    if out_h < 1 or out_w < 1:
        raise ShapeMismatchError("kernel larger than padded input", x.shape, (k, k))
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    windows = sliding_window_view(padded, (k, k), axis=(2, 3))[:, :, ::stride, ::stride][:, :, :out_h, :out_w]
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(batch * out_h * out_w, channels * k * k)
    return np.ascontiguousarray(cols), out_h, out_w


def col2im(cols: np.ndarray, input_shape: tuple[int, ...], k: int, stride: int, pad: int,
           out_h: int, out_w: int) -> np.ndarray:
    batch, channels, height, width = input_shape
    patches = cols.reshape(batch, out_h, out_w, channels, k, k)
    padded = np.zeros((batch, channels, height + 2 * pad, width + 2 * pad))
    for ki in range(k):
        row_end = ki + stride * out_h
        for kj in range(k):
            col_end = kj + stride * out_w
            padded[:, :, ki:row_end:stride, kj:col_end:stride] += patches[:, :, :, :, ki, kj].transpose(0, 3, 1, 2)
    if pad == 0:
        return padded
    return padded[:, :, pad:pad + height, pad:pad + width]


def weight_matrix(W: Tensor) -> Tensor:
    """(c_out, c_in, k, k) weights as the (c_in*k*k, c_out) matrix of the equivalent linear layer."""
    c_out = W.shape[0]
    return Tensor(W.data.reshape(c_out, -1).T)


def _rows_to_maps(rows: np.ndarray, batch: int, out_h: int, out_w: int) -> np.ndarray:
    return np.ascontiguousarray(rows.reshape(batch, out_h, out_w, -1).transpose(0, 3, 1, 2))


def _maps_to_rows(maps: Tensor) -> Tensor:
    batch, channels, out_h, out_w = maps.shape
    return Tensor(maps.data.transpose(0, 2, 3, 1).reshape(batch * out_h * out_w, channels))


def conv2d_forward(x: Tensor, W: Tensor, b: Tensor | None, stride: int = 1, pad: int = 0) -> tuple[Tensor, Tensor]:
    """Returns the output maps and the patch matrix (kept only when parameter gradients are needed)."""
    if x.ndim != 4 or W.ndim != 4 or x.shape[1] != W.shape[1] or W.shape[2] != W.shape[3]:
        raise ShapeMismatchError("conv2d input and weight do not compose", x.shape, W.shape)
    k = W.shape[2]
    cols, out_h, out_w = im2col(x.data, k, stride, pad)
    patches = Tensor.wrap(cols)
    rows = linear_forward(patches, weight_matrix(W), b)
    return Tensor.wrap(_rows_to_maps(rows.data, x.shape[0], out_h, out_w)), patches


def conv2d_output_grad(grad: Tensor, W: Tensor, input_shape: tuple[int, ...], stride: int = 1, pad: int = 0) -> Tensor:
    """Gradient with respect to the conv input: transposed convolution of ``grad``."""
    if grad.ndim != 4 or grad.shape[1] != W.shape[0]:
        raise ShapeMismatchError("conv2d gradient and weight do not compose", grad.shape, W.shape)
    _, _, out_h, out_w = grad.shape
    dcols = backprop_linear(_maps_to_rows(grad), weight_matrix(W))
    return Tensor.wrap(col2im(dcols.data, tuple(input_shape), W.shape[2], stride, pad, out_h, out_w))


def conv2d_param_grad(grad: Tensor, patches: Tensor, weight_shape: tuple[int, ...]) -> tuple[Tensor, Tensor]:
    rows = _maps_to_rows(grad)
    if rows.shape[0] != patches.shape[0]:
        raise ShapeMismatchError("conv2d gradient and patches disagree", grad.shape, patches.shape)
    dW_matrix, db = param_grad(rows, patches)
    return Tensor(dW_matrix.data.T.reshape(weight_shape)), db


def conv2d_input_grad(grad: Tensor, W: Tensor, input_shape: tuple[int, ...], stride: int = 1, pad: int = 0) -> Tensor:
    return conv2d_output_grad(grad, W, input_shape, stride, pad)
