"""
Tape-based reverse mode with full and semi-backward gradient modes.

Whether parameter gradients are computed is decided while the tape is built:
a forward in ``GradMode.SEMI``, or over parameters whose ``requires_grad``
is off, never creates parameter-gradient records and never keeps the
activations only those records would read. Backward then replays exactly
what the tape holds, in reverse.
"""
import logging
import math
from contextlib import contextmanager
from typing import Callable, Iterator

import numpy as np

from custom_utilities.custom_exception import NonFiniteError, TapeError
from dto.response_dto.autodiff import GradResult
from enums.autodiff import GradMode, OpKind
from enums.nn import Activation, LayerKind
from models.layers import Conv2d, Layer, Linear, MaxPool2d
from models.sequential import Model
from services.autodiff.tape import ForwardCost, OpRecord, Tape
from services.nn import conv_kernels, kernels
from tensor.tensor import Tensor, ordered_sum

logger = logging.getLogger(__name__)

# forward cost of the loss head and per-element bookkeeping; lower-order terms
CROSS_ENTROPY_FORWARD_FLOPS_PER_LOGIT = 4
CROSS_ENTROPY_BACKWARD_FLOPS_PER_LOGIT = 2


def set_requires_grad(model: Model, flag: bool) -> None:
    """Set every parameter's flag; the next forward builds its tape accordingly."""
    for param in model.parameters():
        param.requires_grad = flag


def save_requires_grad(model: Model) -> list[bool]:
    return [param.requires_grad for param in model.parameters()]


def restore_requires_grad(model: Model, flags: list[bool]) -> None:
    params = list(model.parameters())
    if len(params) != len(flags):
        raise TapeError(f"cannot restore {len(flags)} flags onto {len(params)} parameters")
    for param, flag in zip(params, flags):
        param.requires_grad = flag


@contextmanager
def parameter_gradients_off(model: Model) -> Iterator[list[bool]]:
    """Turn parameter gradients off for the block and restore each flag exactly afterwards."""
    initial = save_requires_grad(model)
    set_requires_grad(model, False)
    try:
        yield initial
    finally:
        restore_requires_grad(model, initial)


# ---------------------------------------------------------------- forward

def _forward_linear(layer: Linear, index: int, a: Tensor, value_id: int, tape: Tape) -> tuple[Tensor, int]:
    weight, bias = layer.weight, layer.bias
    s = kernels.linear_forward(a, weight.value, bias.value if bias is not None else None)
    batch = a.shape[0]
    dominant = 2 * batch * layer.weight_count
    bias_flops = batch * layer.d_out if bias is not None else 0
    tape.forward_costs.append(ForwardCost(index, dominant, bias_flops))

    out_node = tape.record(OpKind.LINEAR_OUTPUT_GRAD, (value_id,), index, flops=dominant)
    out_node.saved["weight"] = weight.value

    if tape.mode is GradMode.FULL:
        wants_weight = weight.requires_grad
        wants_bias = bias is not None and bias.requires_grad
        if wants_weight or wants_bias:
            params = {}
            if wants_weight:
                params["weight"] = weight
            if wants_bias:
                params["bias"] = bias
            node = tape.record(
                OpKind.LINEAR_PARAM_GRAD, (value_id,), index, params=params,
                flops=dominant if wants_weight else 0,
                lower_flops=bias_flops if wants_bias else 0,
            )
            if wants_weight:
                node.save(activation=a)
    return s, out_node.node_id


def _forward_conv(layer: Conv2d, index: int, x: Tensor, value_id: int, tape: Tape) -> tuple[Tensor, int]:
    weight, bias = layer.weight, layer.bias
    out, patches = conv_kernels.conv2d_forward(
        x, weight.value, bias.value if bias is not None else None, layer.stride, layer.pad,
    )
    batch, _, out_h, out_w = out.shape
    positions = out_h * out_w
    dominant = 2 * batch * positions * layer.weight_count
    bias_flops = batch * positions * layer.c_out if bias is not None else 0
    tape.forward_costs.append(ForwardCost(index, dominant, bias_flops))

    out_node = tape.record(OpKind.CONV_OUTPUT_GRAD, (value_id,), index, flops=dominant)
    out_node.saved.update(weight=weight.value, input_shape=x.shape, stride=layer.stride, pad=layer.pad)

    if tape.mode is GradMode.FULL:
        wants_weight = weight.requires_grad
        wants_bias = bias is not None and bias.requires_grad
        if wants_weight or wants_bias:
            params = {}
            if wants_weight:
                params["weight"] = weight
            if wants_bias:
                params["bias"] = bias
            node = tape.record(
                OpKind.CONV_PARAM_GRAD, (value_id,), index, params=params,
                flops=dominant if wants_weight else 0,
                lower_flops=bias_flops if wants_bias else 0,
            )
            node.saved["weight_shape"] = weight.shape
            if wants_weight:
                node.save(patches=patches)
    return out, out_node.node_id


def _forward_relu(layer: Layer, index: int, s: Tensor, value_id: int, tape: Tape) -> tuple[Tensor, int]:
    tape.forward_costs.append(ForwardCost(index, 0, s.size))
    node = tape.record(OpKind.RELU, (value_id,), index, lower_flops=s.size)
    node.save(pre_activation=s)
    return kernels.relu_forward(s), node.node_id


def _forward_maxpool(layer: MaxPool2d, index: int, x: Tensor, value_id: int, tape: Tape) -> tuple[Tensor, int]:
    out, argmax = kernels.maxpool2d_forward(x, layer.k)
    tape.forward_costs.append(ForwardCost(index, 0, x.size))
    node = tape.record(OpKind.MAXPOOL, (value_id,), index, lower_flops=out.size)
    node.save(argmax=argmax)
    node.saved.update(input_shape=x.shape, k=layer.k)
    return out, node.node_id


def _forward_flatten(layer: Layer, index: int, x: Tensor, value_id: int, tape: Tape) -> tuple[Tensor, int]:
    tape.forward_costs.append(ForwardCost(index))
    node = tape.record(OpKind.FLATTEN, (value_id,), index)
    node.saved["input_shape"] = x.shape
    return x.reshape(x.shape[0], -1), node.node_id


_FORWARD: dict[LayerKind, Callable[..., tuple[Tensor, int]]] = {
    LayerKind.LINEAR: _forward_linear,
    LayerKind.CONV2D: _forward_conv,
    LayerKind.RELU: _forward_relu,
    LayerKind.MAXPOOL2D: _forward_maxpool,
    LayerKind.FLATTEN: _forward_flatten,
}


def _run_layers(model: Model, inputs: Tensor, tape: Tape) -> tuple[Tensor, int, int]:
    activation = inputs
    value_id = tape.input_id
    peak = activation.nbytes
    for index, layer in enumerate(model.layers):
        out, value_id = _FORWARD[layer.kind](layer, index, activation, value_id, tape)
        peak = max(peak, tape.saved_bytes + activation.nbytes + out.nbytes)
        activation = out
    return activation, value_id, peak


def predict(model: Model, inputs: Tensor) -> Tensor:
    """Logits without keeping a tape."""
    if not isinstance(inputs, Tensor):
        inputs = Tensor(inputs)
    model.check_input(inputs.shape)
    scratch = Tape(mode=GradMode.SEMI, parameters=[], input_shape=inputs.shape)
    logits, _, _ = _run_layers(model, inputs, scratch)
    return logits


def forward(model: Model, inputs: Tensor, labels, mode: GradMode = GradMode.FULL) -> tuple[float, Tape]:
    """
    Run the model on ``inputs`` and build a tape for one backward.

    The loss does not depend on ``mode``; the mode only decides what the
    tape records.
    """
    mode = GradMode(mode)
    if not isinstance(inputs, Tensor):
        inputs = Tensor(inputs)
    model.check_input(inputs.shape)

    tape = Tape(mode=mode, parameters=list(model.parameters()), input_shape=inputs.shape)
    activation, value_id, peak = _run_layers(model, inputs, tape)

    loss, dlogits = kernels.cross_entropy(activation, labels)
    if not math.isfinite(loss):
        raise NonFiniteError(f"non-finite loss {loss}")
    logits = activation.size
    tape.forward_costs.append(
        ForwardCost(len(model.layers), 0, CROSS_ENTROPY_FORWARD_FLOPS_PER_LOGIT * logits)
    )
    node = tape.record(
        OpKind.CROSS_ENTROPY, (value_id,), len(model.layers),
        lower_flops=CROSS_ENTROPY_BACKWARD_FLOPS_PER_LOGIT * logits,
    )
    node.save(dlogits=dlogits)
    tape.loss = loss
    tape.forward_peak_bytes = max(peak, tape.saved_bytes + activation.nbytes)
    return loss, tape


# ---------------------------------------------------------------- backward

def _backward_cross_entropy(node: OpRecord, grad: Tensor | None) -> Tensor:
    return node.saved["dlogits"]


def _backward_linear(node: OpRecord, grad: Tensor) -> Tensor:
    return kernels.backprop_linear(grad, node.saved["weight"])


def _backward_conv(node: OpRecord, grad: Tensor) -> Tensor:
    saved = node.saved
    return conv_kernels.conv2d_output_grad(grad, saved["weight"], saved["input_shape"], saved["stride"], saved["pad"])


def _backward_relu(node: OpRecord, grad: Tensor) -> Tensor:
    return kernels.activation_grad(grad, node.saved["pre_activation"], Activation.RELU)


def _backward_maxpool(node: OpRecord, grad: Tensor) -> Tensor:
    saved = node.saved
    return kernels.maxpool2d_backward(grad, saved["argmax"], saved["input_shape"], saved["k"])


def _backward_flatten(node: OpRecord, grad: Tensor) -> Tensor:
    return grad.reshape(*node.saved["input_shape"])


def _linear_param_grads(node: OpRecord, grad: Tensor) -> dict[str, Tensor]:
    grads = {}
    if "weight" in node.params:
        d_weight, d_bias = kernels.param_grad(grad, node.saved["activation"])
        grads["weight"] = d_weight
    else:
        d_bias = Tensor.wrap(ordered_sum(grad.data, axis=0))
    if "bias" in node.params:
        grads["bias"] = d_bias
    return grads


def _conv_param_grads(node: OpRecord, grad: Tensor) -> dict[str, Tensor]:
    grads = {}
    if "weight" in node.params:
        d_weight, d_bias = conv_kernels.conv2d_param_grad(grad, node.saved["patches"], node.saved["weight_shape"])
        grads["weight"] = d_weight
    else:
        d_bias = Tensor.wrap(ordered_sum(np.moveaxis(grad.data, 1, -1).reshape(-1, grad.shape[1]), axis=0))
    if "bias" in node.params:
        grads["bias"] = d_bias
    return grads


_BACKWARD: dict[OpKind, Callable[[OpRecord, Tensor | None], Tensor]] = {
    OpKind.CROSS_ENTROPY: _backward_cross_entropy,
    OpKind.LINEAR_OUTPUT_GRAD: _backward_linear,
    OpKind.CONV_OUTPUT_GRAD: _backward_conv,
    OpKind.RELU: _backward_relu,
    OpKind.MAXPOOL: _backward_maxpool,
    OpKind.FLATTEN: _backward_flatten,
}

_PARAM_BACKWARD: dict[OpKind, Callable[[OpRecord, Tensor], dict[str, Tensor]]] = {
    OpKind.LINEAR_PARAM_GRAD: _linear_param_grads,
    OpKind.CONV_PARAM_GRAD: _conv_param_grads,
}


def backward(tape: Tape, input_only: bool = False) -> GradResult:
    """
    Replay ``tape`` in reverse.

    The input gradient is always produced. Parameter gradients are produced
    for full tapes only; ``input_only=True`` skips them at run time, which
    saves their FLOPs but not the activations the tape already holds.
    """
    if tape.consumed:
        raise TapeError("backward already ran on this tape")
    if tape.loss is None or not tape.nodes or tape.nodes[-1].kind is not OpKind.CROSS_ENTROPY:
        raise TapeError("tape is incomplete; run forward first")
    if tape.mode is GradMode.SEMI and tape.has_param_records():
        raise TapeError("semi-backward tape holds parameter-gradient records")
    tape.consumed = True

    skip_params = input_only or tape.mode is GradMode.SEMI
    grad: Tensor | None = None
    live = tape.saved_bytes
    peak = live
    param_grads: dict[str, Tensor] = {}

    for node in reversed(tape.nodes):
        if node.kind.is_param_grad:
            if skip_params:
                node.skipped = True
            else:
                for key, value in _PARAM_BACKWARD[node.kind](node, grad).items():
                    param = node.params[key]
                    param.grad = value if param.grad is None else Tensor.wrap(param.grad.data + value.data)
                    param_grads[param.name] = value
                    tape.param_grad_bytes += value.nbytes
                    live += value.nbytes
                tape.executed.append(node.kind)
        else:
            new_grad = _BACKWARD[node.kind](node, grad)
            live += new_grad.nbytes
            peak = max(peak, live)
            if grad is not None:
                live -= grad.nbytes
            grad = new_grad
            tape.executed.append(node.kind)
        peak = max(peak, live)
        live -= node.saved_bytes
        node.release()

    for param in tape.parameters:
        if not param.requires_grad:
            param.grad = None

    if not np.isfinite(grad.data).all():
        raise NonFiniteError("non-finite input gradient")
    tape.backward_peak_bytes = peak
    logger.debug("backward mode=%s executed=%d nodes param_grad_bytes=%d", tape.mode, len(tape.executed), tape.param_grad_bytes)

    return GradResult(
        input_grad=grad,
        param_grads=param_grads if tape.mode is GradMode.FULL and not input_only else None,
    )
