from typing import Optional

from pydantic import BaseModel, ConfigDict

from tensor.tensor import Tensor


class GradResult(BaseModel):
    """Gradients from one backward pass"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    input_grad: Tensor
    param_grads: Optional[dict[str, Tensor]] = None


class FlopBreakdown(BaseModel):
    """Analytic FLOPs, 1 multiply-accumulate = 2 FLOPs"""
    dominant: int = 0
    lower: int = 0

    @property
    def total(self) -> int:
        return self.dominant + self.lower

    def __add__(self, other: "FlopBreakdown") -> "FlopBreakdown":
        return FlopBreakdown(dominant=self.dominant + other.dominant, lower=self.lower + other.lower)


class AllocReport(BaseModel):
    """Tracked allocation of one forward/backward"""
    peak_bytes: int
    param_grad_bytes: int
    saved_bytes: int
