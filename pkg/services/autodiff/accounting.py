"""
Analytic cost accounting over a tape.

Dominant terms are the multiply-accumulates of linear and conv layers,
2 FLOPs each: ``2 * B * T * M`` per layer and per computation (forward,
output gradient, parameter gradient), with ``T`` the number of output
positions and ``M`` the layer's weight count. Bias, activation, pooling and
loss work is tracked separately as lower-order FLOPs.
"""
from custom_utilities.custom_exception import TapeError
from dto.response_dto.autodiff import AllocReport, FlopBreakdown
from enums.autodiff import Phase
from services.autodiff.tape import Tape


def flop_breakdown(tape: Tape, phase: Phase = Phase.BOTH) -> FlopBreakdown:
    phase = Phase(phase)
    result = FlopBreakdown()
    if phase in (Phase.FORWARD_ONLY, Phase.BOTH):
        for cost in tape.forward_costs:
            result += FlopBreakdown(dominant=cost.flops, lower=cost.lower_flops)
    if phase in (Phase.BACKWARD_ONLY, Phase.BOTH):
        for node in tape.nodes:
            if not node.skipped:
                result += FlopBreakdown(dominant=node.flops, lower=node.lower_flops)
    return result


def flop_count(tape: Tape, phase: Phase = Phase.BOTH, include_lower: bool = False) -> int:
    """Dominant FLOPs of ``phase``; ``include_lower`` adds the lower-order bucket."""
    breakdown = flop_breakdown(tape, phase)
    return breakdown.total if include_lower else breakdown.dominant


def alloc_report(tape: Tape) -> AllocReport:
    if not tape.consumed:
        raise TapeError("alloc_report needs a tape whose backward has run")
    return AllocReport(
        peak_bytes=max(tape.forward_peak_bytes, tape.backward_peak_bytes),
        param_grad_bytes=tape.param_grad_bytes,
        saved_bytes=tape.saved_bytes,
    )
