import numpy as np

from dto.request_dto.training import OptimizerConfig
from enums.training import OptimizerKind
from models.parameter import Parameter
from tensor.tensor import Tensor


class SGD:
    """Plain or heavy-ball SGD over parameters that require gradients."""

    def __init__(self, params: list[Parameter], config: OptimizerConfig):
        self.params = list(params)
        self.lr = config.lr
        self.momentum = config.momentum if config.kind is OptimizerKind.SGD_MOMENTUM else 0.0
        self._velocity: dict[int, np.ndarray] = {}

    def step(self) -> None:
        for index, param in enumerate(self.params):
            if not param.requires_grad or param.grad is None:
                continue
            update = param.grad.data
            if self.momentum:
                velocity = self._velocity.get(index)
                velocity = update.copy() if velocity is None else self.momentum * velocity + update
                self._velocity[index] = velocity
                update = velocity
            param.value = Tensor.wrap(param.value.data - self.lr * update)

    def zero_grad(self) -> None:
        for param in self.params:
            param.grad = None
