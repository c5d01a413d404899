"""
Named model presets.

``linear``                      linear-softmax on the flattened input
``mlp-<L>x<W>``                 L linear layers of width W with ReLU between them
``mlp-<L>layers-<W>wide``       same, long form
``...-nobias``                  suffix for bias-free MLPs
``cnn-small``                   three 3×3 conv blocks and a linear head
"""
import math
import re

from custom_utilities.custom_exception import ConfigError
from models.layers import Conv2d, Flatten, Layer, Linear, MaxPool2d, ReLU
from models.sequential import Model
from tensor.rng import Rng

_MLP_PATTERN = re.compile(r"^mlp-(\d+)(?:x|layers-)(\d+)(?:wide)?$")


def _flatten_prefix(input_shape: tuple[int, ...]) -> tuple[list[Layer], int]:
    if len(input_shape) == 1:
        return [], input_shape[0]
    return [Flatten()], math.prod(input_shape)


def build_mlp(input_shape, num_classes: int, depth: int, width: int, bias: bool, rng: Rng) -> list[Layer]:
    layers, d_in = _flatten_prefix(tuple(input_shape))
    for _ in range(depth - 1):
        layers += [Linear(d_in, width, bias=bias, rng=rng), ReLU()]
        d_in = width
    layers.append(Linear(d_in, num_classes, bias=bias, rng=rng))
    return layers


def build_cnn_small(input_shape, num_classes: int, bias: bool, rng: Rng) -> list[Layer]:
    if len(input_shape) != 3 or min(input_shape[1:]) < 4:
        raise ConfigError(f"cnn-small needs (C, H, W) input with H, W >= 4, got {tuple(input_shape)}")
    channels, height, width = input_shape
    layers: list[Layer] = [
        Conv2d(channels, 8, 3, pad=1, bias=bias, rng=rng), ReLU(), MaxPool2d(2),
        Conv2d(8, 16, 3, pad=1, bias=bias, rng=rng), ReLU(), MaxPool2d(2),
        Conv2d(16, 16, 3, pad=1, bias=bias, rng=rng), ReLU(),
        Flatten(),
    ]
    flat = 16 * (height // 4) * (width // 4)
    layers.append(Linear(flat, num_classes, bias=bias, rng=rng))
    return layers


def build_preset(name: str, input_shape: tuple[int, ...], num_classes: int, seed: int = 0) -> Model:
    rng = Rng(seed)
    base = name.strip().lower()
    bias = True
    if base.endswith("-nobias"):
        base, bias = base[: -len("-nobias")], False

    if base == "linear":
        layers = build_mlp(input_shape, num_classes, depth=1, width=num_classes, bias=bias, rng=rng)
    elif base == "cnn-small":
        layers = build_cnn_small(input_shape, num_classes, bias=bias, rng=rng)
    else:
        match = _MLP_PATTERN.match(base)
        if not match:
            raise ConfigError(f"unknown model preset '{name}'")
        depth, width = int(match.group(1)), int(match.group(2))
        if depth < 1 or width < 1:
            raise ConfigError(f"mlp preset needs depth and width >= 1, got '{name}'")
        layers = build_mlp(input_shape, num_classes, depth=depth, width=width, bias=bias, rng=rng)

    return Model(layers, input_shape=input_shape, name=name)
