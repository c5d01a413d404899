from pydantic import BaseModel, Field, model_validator

from dto.request_dto.attack import AttackConfig
from enums.training import OptimizerKind


class OptimizerConfig(BaseModel):
    """Outer optimizer of adversarial training"""
    kind: OptimizerKind = OptimizerKind.SGD
    lr: float = Field(0.1, gt=0, description="Learning rate")
    momentum: float = Field(0.0, ge=0, lt=1, description="Momentum factor (sgd_momentum only)")

    @model_validator(mode="after")
    def momentum_matches_kind(self):
        if self.kind is OptimizerKind.SGD_MOMENTUM and self.momentum == 0:
            raise ValueError("sgd_momentum needs momentum > 0")
        return self


class TrainConfig(BaseModel):
    """Adversarial training with K-step attacks"""
    attack: AttackConfig
    optimizer: OptimizerConfig = OptimizerConfig()
    epochs: int = Field(1, ge=0)
    batch_size: int = Field(32, ge=1)
    toggle_semi: bool = Field(True, description="Attack with parameter gradients off (semi-backward)")
    accumulate_perturbation: bool = Field(
        False, description="Feed each batch's adversarial examples back as the next epoch's inputs"
    )
    seed: int = Field(0, ge=0, description="Seed for batch shuffling")
