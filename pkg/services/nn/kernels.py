"""
Dense layer kernels.

Row-vector convention throughout: a layer computes ``s = a W + b`` with
``a`` of shape (B, d_in) and ``W`` of shape (d_in, d_out). The three backward
computations are

    output gradient     ds_l = (ds_{l+1} W_{l+1}^T) * phi'(s_l)
    parameter gradient  dW_l = a_l^T ds_l,  db_l = 1^T ds_l
    input gradient      dp   = ds_1 W_1^T

and the output and input gradients share ``backprop_linear``, so the chain
that reaches the input is the same code whether parameter gradients are
computed or not.
"""
import numpy as np

from custom_utilities.custom_exception import CustomException, ShapeMismatchError
from enums.cli import ExitCode
from enums.nn import Activation
from tensor.tensor import Tensor, check_finite, ordered_dot, ordered_sum


def _wrap(array: np.ndarray, where: str) -> Tensor:
    check_finite(array, where)
    return Tensor.wrap(array)


def linear_forward(a: Tensor, W: Tensor, b: Tensor | None) -> Tensor:
    if a.ndim != 2 or W.ndim != 2 or a.shape[1] != W.shape[0]:
        raise ShapeMismatchError("linear input and weight do not compose", a.shape, W.shape)
    s = ordered_dot(a.data, W.data)
    if b is not None:
        if b.shape != (W.shape[1],):
            raise ShapeMismatchError("bias does not match weight columns", b.shape, W.shape)
        s += b.data
    return _wrap(s, "linear_forward")


def backprop_linear(ds: Tensor, W: Tensor) -> Tensor:
    """``ds W^T``: gradient with respect to a linear layer's input."""
    if ds.ndim != 2 or W.ndim != 2 or ds.shape[1] != W.shape[1]:
        raise ShapeMismatchError("gradient and weight do not compose", ds.shape, W.shape)
    return _wrap(ordered_dot(ds.data, W.data.T), "backprop_linear")


def relu_forward(s: Tensor) -> Tensor:
    return Tensor.wrap(np.maximum(s.data, 0.0))


def activation_grad(da: Tensor, s: Tensor, phi: Activation = Activation.RELU) -> Tensor:
    """``da * phi'(s)``; ReLU'(0) is 0."""
    if da.shape != s.shape:
        raise ShapeMismatchError("activation gradient shape mismatch", da.shape, s.shape)
    if Activation(phi) is Activation.IDENTITY:
        return da
    return _wrap(np.where(s.data > 0.0, da.data, 0.0), "activation_grad")


def output_grad(ds_next: Tensor, W_next: Tensor, s: Tensor, phi: Activation = Activation.RELU) -> Tensor:
    return activation_grad(backprop_linear(ds_next, W_next), s, phi)


def param_grad(ds: Tensor, a: Tensor) -> tuple[Tensor, Tensor]:
    if ds.ndim != 2 or a.ndim != 2 or ds.shape[0] != a.shape[0]:
        raise ShapeMismatchError("batch dimensions disagree", ds.shape, a.shape)
    dW = ordered_dot(a.data.T, ds.data)
    db = ordered_sum(ds.data, axis=0)
    return _wrap(dW, "param_grad"), _wrap(db, "param_grad")


def input_grad(ds1: Tensor, W1: Tensor) -> Tensor:
    return backprop_linear(ds1, W1)


def check_labels(labels: np.ndarray, batch: int, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (batch,):
        raise ShapeMismatchError("labels do not match batch", labels.shape, (batch,))
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.equal(np.mod(labels, 1), 0)):
            raise CustomException("labels must be integral", exit_code=ExitCode.LOAD_FAILURE)
        labels = labels.astype(np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise CustomException(
            f"label out of range [0, {num_classes}): min={labels.min()} max={labels.max()}",
            exit_code=ExitCode.LOAD_FAILURE,
        )
    return labels


def cross_entropy(logits: Tensor, labels) -> tuple[float, Tensor]:
    """Mean negative log-softmax and its gradient ``(softmax - onehot) / B``."""
    if logits.ndim != 2:
        raise ShapeMismatchError("logits must be (B, C)", logits.shape, None)
    batch, num_classes = logits.shape
    labels = check_labels(labels, batch, num_classes)
    rows = np.arange(batch)

    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    total = ordered_sum(exp, axis=1)[:, None]
    log_total = np.log(total)
    loss = float(ordered_sum(log_total[:, 0] - shifted[rows, labels]) / batch)

    dlogits = exp / total
    dlogits[rows, labels] -= 1.0
    dlogits /= batch
    return loss, _wrap(dlogits, "cross_entropy")


def maxpool2d_forward(x: Tensor, k: int) -> tuple[Tensor, np.ndarray]:
    """Returns the pooled tensor and, per window, the flat argmax index (first max wins)."""
    if x.ndim != 4:
        raise ShapeMismatchError("maxpool input must be (B, C, H, W)", x.shape, None)
    batch, channels, height, width = x.shape
    out_h, out_w = height // k, width // k
    cropped = x.data[:, :, : out_h * k, : out_w * k]
    windows = cropped.reshape(batch, channels, out_h, k, out_w, k).transpose(0, 1, 2, 4, 3, 5)
    windows = windows.reshape(batch, channels, out_h, out_w, k * k)
    argmax = windows.argmax(axis=-1)
    pooled = np.take_along_axis(windows, argmax[..., None], axis=-1)[..., 0]
    return Tensor.wrap(np.ascontiguousarray(pooled)), argmax


def maxpool2d_backward(grad: Tensor, argmax: np.ndarray, input_shape: tuple[int, ...], k: int) -> Tensor:
    batch, channels, height, width = input_shape
    out_h, out_w = argmax.shape[2], argmax.shape[3]
    windows = np.zeros((batch, channels, out_h, out_w, k * k))
    np.put_along_axis(windows, argmax[..., None], grad.data[..., None], axis=-1)
    windows = windows.reshape(batch, channels, out_h, out_w, k, k).transpose(0, 1, 2, 4, 3, 5)
    dx = np.zeros(input_shape)
    dx[:, :, : out_h * k, : out_w * k] = windows.reshape(batch, channels, out_h * k, out_w * k)
    return _wrap(dx, "maxpool2d_backward")
