from typing import Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from enums.attacks import InitPolicy, StepRule
from enums.autodiff import GradMode


class AttackConfig(BaseModel):
    """Settings of one l-inf attack run"""
    epsilon: float = Field(..., ge=0, description="l-inf radius in input units")
    eta: Optional[Union[float, list[float]]] = Field(
        None, description="Constant step size or one step size per step; defaults to eps/4 (eps when steps == 1)"
    )
    steps: int = Field(1, ge=1, description="Number of ascent steps K")
    step_rule: StepRule = StepRule.SIGNED_GRAD
    init: InitPolicy = InitPolicy.ZERO
    clamp_range: Optional[tuple[float, float]] = Field(None, description="Valid data range for x + p")
    mode: GradMode = GradMode.SEMI
    seed: int = Field(0, ge=0, description="Seed for uniform-random initialisation")
    evaluate_final: bool = Field(True, description="Evaluate the loss at the final perturbation after the attack")

    @field_validator("eta")
    @classmethod
    def eta_positive(cls, value):
        values = value if isinstance(value, list) else [value] if value is not None else []
        if any(v <= 0 for v in values):
            raise ValueError("step sizes must be > 0")
        return value

    @model_validator(mode="after")
    def check_schedule(self):
        if isinstance(self.eta, list) and len(self.eta) != self.steps:
            raise ValueError(f"eta schedule has {len(self.eta)} entries for {self.steps} steps")
        if self.clamp_range is not None and self.clamp_range[0] > self.clamp_range[1]:
            raise ValueError(f"clamp_range lower bound exceeds upper bound: {self.clamp_range}")
        return self

    def step_size(self, step: int) -> float:
        if isinstance(self.eta, list):
            return self.eta[step]
        if self.eta is not None:
            return self.eta
        return self.epsilon if self.steps == 1 else self.epsilon / 4
