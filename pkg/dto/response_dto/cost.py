from typing import Optional

from pydantic import BaseModel


class CostReport(BaseModel):
    """FLOPs, tracked bytes and wall-clock of a measured run"""
    forward_flops: int = 0
    backward_flops: int = 0
    lower_order_flops: int = 0
    peak_bytes: int = 0
    param_grad_bytes: int = 0
    wall_ns_median: float = 0.0
    wall_ns_std: float = 0.0
    wall_ns_mean: float = 0.0
    repeats: int = 1
    speedup: Optional[float] = None

    @property
    def total_flops(self) -> int:
        return self.forward_flops + self.backward_flops


class IterationCost(BaseModel):
    """Dominant FLOPs and wall time of one adversarial-training iteration"""
    attack_flops: int
    update_flops: int
    total_flops: int
    wall_ns: int
    attack_lower_flops: int = 0
    update_lower_flops: int = 0
    loss: float = 0.0


class EpochReport(BaseModel):
    """Per-epoch totals of an adversarial-training run"""
    epoch: int
    steps: int
    toggle_semi: bool
    iterations: int
    attack_flops: int
    update_flops: int
    total_flops: int
    wall_ns: int
    mean_loss: float
    theoretical_speedup: float = 0.0
