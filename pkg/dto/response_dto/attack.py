from typing import Optional

from pydantic import BaseModel, ConfigDict

from custom_utilities.hashing import tensor_digest
from dto.response_dto.cost import CostReport
from tensor.tensor import Tensor


class AttackResult(BaseModel):
    """Outcome of an attack run"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    perturbation: Tensor
    adversarial: Tensor
    loss_trace: list[float]
    final_loss: Optional[float] = None
    cost: CostReport

    @property
    def perturbation_digest(self) -> str:
        return tensor_digest(self.perturbation.data)
