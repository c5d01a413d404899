from dataclasses import dataclass, field
from typing import Any

import numpy as np

from enums.autodiff import GradMode, OpKind
from models.parameter import Parameter
from tensor.tensor import Tensor

INPUT_ID = 0


@dataclass
class OpRecord:
    """
    One backward computation recorded during forward.

    ``saved`` holds the tensors backward reads. Weights are referenced, not
    copied, and are excluded from ``saved_bytes``.
    """
    node_id: int
    kind: OpKind
    input_ids: tuple[int, ...]
    layer_index: int
    saved: dict[str, Any] = field(default_factory=dict)
    params: dict[str, Parameter] = field(default_factory=dict)
    flops: int = 0
    lower_flops: int = 0
    saved_bytes: int = 0
    skipped: bool = False

    def save(self, **tensors) -> None:
        for key, value in tensors.items():
            self.saved[key] = value
            if isinstance(value, Tensor):
                self.saved_bytes += value.nbytes
            elif isinstance(value, np.ndarray):
                self.saved_bytes += int(value.nbytes)

    def release(self) -> None:
        self.saved.clear()


@dataclass
class ForwardCost:
    layer_index: int
    flops: int = 0
    lower_flops: int = 0


@dataclass
class Tape:
    """
    Ordered record of one forward pass.

    Nodes are appended in forward order, so every node's inputs precede it;
    backward walks them in exact reverse. A tape supports a single backward.
    """
    mode: GradMode
    parameters: list[Parameter]
    input_shape: tuple[int, ...]
    input_id: int = INPUT_ID
    nodes: list[OpRecord] = field(default_factory=list)
    forward_costs: list[ForwardCost] = field(default_factory=list)
    loss: float | None = None
    forward_peak_bytes: int = 0
    consumed: bool = False
    executed: list[OpKind] = field(default_factory=list)
    backward_peak_bytes: int = 0
    param_grad_bytes: int = 0

    def record(self, kind: OpKind, input_ids: tuple[int, ...], layer_index: int, **kwargs) -> OpRecord:
        node = OpRecord(node_id=len(self.nodes) + 1, kind=kind, input_ids=input_ids,
                        layer_index=layer_index, **kwargs)
        self.nodes.append(node)
        return node

    @property
    def saved_bytes(self) -> int:
        return sum(node.saved_bytes for node in self.nodes)

    def has_param_records(self) -> bool:
        return any(node.kind.is_param_grad for node in self.nodes)
