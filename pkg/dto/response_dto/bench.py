from typing import Optional

from pydantic import BaseModel

BENCH_COLUMNS = [
    "model", "batch", "K", "mode", "fwd_flops", "bwd_flops", "peak_bytes",
    "wall_ns_median", "wall_ns_std", "speedup", "wall_ns_mean", "flop_ratio", "status",
]


class BenchRow(BaseModel):
    """One (model, batch, K, mode) measurement"""
    model: str
    batch: int
    K: int
    mode: str
    fwd_flops: int
    bwd_flops: int
    peak_bytes: int
    wall_ns_median: float
    wall_ns_std: float
    speedup: Optional[float] = None
    wall_ns_mean: float
    flop_ratio: Optional[float] = None
    status: str = ""


class AttackSummary(BaseModel):
    """Row written by the attack command"""
    model: str
    attack: str
    mode: str
    batch: int
    epsilon: float
    steps: int
    perturbation_sha256: str
    linf: float
    clean_loss: float
    final_loss: float
    clean_accuracy: float
    adversarial_accuracy: float
    fwd_flops: int
    bwd_flops: int
    peak_bytes: int
    param_grad_bytes: int
    wall_ns: float
