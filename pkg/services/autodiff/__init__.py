from services.autodiff.engine import (
    backward,
    forward,
    parameter_gradients_off,
    predict,
    restore_requires_grad,
    save_requires_grad,
    set_requires_grad,
)
from services.autodiff.accounting import alloc_report, flop_breakdown, flop_count

__all__ = [
    "forward", "backward", "set_requires_grad", "save_requires_grad", "restore_requires_grad",
    "parameter_gradients_off", "predict", "flop_count", "flop_breakdown", "alloc_report",
]
