from typing import Optional

from pydantic import BaseModel, ConfigDict

from tensor.tensor import Tensor


class Parameter(BaseModel):
    """
    A trainable tensor of a layer.

    Attributes:
        name (str): Dotted name, e.g. ``"2.weight"``.
        value (Tensor): Current value. Replaced, never mutated, by optimizers.
        requires_grad (bool): When false, forward passes build no parameter-gradient
            record for this tensor and backward leaves ``grad`` empty.
        grad (Optional[Tensor]): Accumulated gradient from the last full backward.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    value: Tensor
    requires_grad: bool = True
    grad: Optional[Tensor] = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def nbytes(self) -> int:
        return self.value.nbytes
