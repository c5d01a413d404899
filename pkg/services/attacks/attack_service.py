"""
Iterative l-inf attacks over the tape engine.

Each step rebuilds the tape: forward on ``x + p``, backward for the input
gradient, ascent step, projection onto the l-inf ball and, when a data
range is configured, onto valid inputs. In ``GradMode.SEMI`` the tapes hold
no parameter-gradient work; the trajectory is the same in both modes.
"""
import logging
import time
from typing import Callable, Optional

import numpy as np

from custom_utilities.custom_exception import NonFiniteError
from dto.request_dto.attack import AttackConfig
from dto.response_dto.attack import AttackResult
from dto.response_dto.autodiff import FlopBreakdown
from dto.response_dto.cost import CostReport
from enums.attacks import InitPolicy, StepRule
from enums.autodiff import GradMode, Phase
from models.sequential import Model
from services.autodiff.accounting import alloc_report, flop_breakdown
from services.autodiff.engine import backward, forward, predict
from tensor.rng import Rng
from tensor.tensor import Tensor, add, clamp, mul, sign, sub

logger = logging.getLogger(__name__)

StepCallback = Callable[[int, Tensor, float], None]


def project_linf(p: Tensor, epsilon: float) -> Tensor:
    """Metric projection onto ``{p : |p|_inf <= epsilon}``."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    return clamp(p, -epsilon, epsilon)


def _adversarial_input(x: Tensor, p: Tensor, clamp_range: Optional[tuple[float, float]]) -> Tensor:
    moved = add(x, p)
    if clamp_range is None:
        return moved
    return clamp(moved, *clamp_range)


def _feasible(x: Tensor, p: Tensor, cfg: AttackConfig) -> Tensor:
    p = project_linf(p, cfg.epsilon)
    if cfg.clamp_range is not None:
        p = project_linf(sub(_adversarial_input(x, p, cfg.clamp_range), x), cfg.epsilon)
    return p


def _initial_perturbation(x: Tensor, cfg: AttackConfig) -> Tensor:
    if cfg.init is InitPolicy.UNIFORM_RANDOM and cfg.epsilon > 0:
        p = Rng(cfg.seed).uniform(x.shape, -cfg.epsilon, cfg.epsilon)
    else:
        p = Tensor.zeros(x.shape)
    return _feasible(x, p, cfg)


def evaluate_loss(model: Model, x: Tensor, y) -> float:
    loss, _ = forward(model, x, y, GradMode.SEMI)
    return loss


def accuracy(model: Model, x: Tensor, y) -> float:
    logits = predict(model, x)
    return float(np.mean(np.argmax(logits.data, axis=1) == np.asarray(y)))


def pgd(model: Model, x: Tensor, y, cfg: AttackConfig, callback: Optional[StepCallback] = None) -> AttackResult:
    """
    Projected gradient ascent on the loss inside the l-inf ball.

    ``callback(step, p, loss)`` is called after every projected update.
    """
    if not isinstance(x, Tensor):
        x = Tensor(x)
    model.check_input(x.shape)
    labels = np.asarray(y)

    params = list(model.parameters())
    p = _initial_perturbation(x, cfg)
    losses: list[float] = []
    forward_cost = FlopBreakdown()
    backward_cost = FlopBreakdown()
    peak_bytes = 0
    param_grad_bytes = 0

    started = time.perf_counter_ns()
    for step in range(cfg.steps):
        # the attack leaves whatever gradients the caller holds untouched
        held_grads = [param.grad for param in params]
        try:
            loss, tape = forward(model, _adversarial_input(x, p, cfg.clamp_range), labels, cfg.mode)
            grads = backward(tape)
        except NonFiniteError as exc:
            logger.error("attack aborted at step %d: %s", step, exc.message)
            raise NonFiniteError(f"attack aborted: {exc.message}", step=step) from exc
        for param, held in zip(params, held_grads):
            param.grad = held

        forward_cost += flop_breakdown(tape, Phase.FORWARD_ONLY)
        backward_cost += flop_breakdown(tape, Phase.BACKWARD_ONLY)
        report = alloc_report(tape)
        peak_bytes = max(peak_bytes, report.peak_bytes)
        param_grad_bytes = max(param_grad_bytes, report.param_grad_bytes)

        gradient = grads.input_grad
        direction = sign(gradient) if cfg.step_rule is StepRule.SIGNED_GRAD else gradient
        p = _feasible(x, add(p, mul(direction, cfg.step_size(step))), cfg)
        losses.append(loss)
        logger.debug("step %d loss %.6f mode %s", step, loss, cfg.mode)
        if callback is not None:
            callback(step, p, loss)
    wall_ns = time.perf_counter_ns() - started

    adversarial = _adversarial_input(x, p, cfg.clamp_range)
    cost = CostReport(
        forward_flops=forward_cost.dominant,
        backward_flops=backward_cost.dominant,
        lower_order_flops=forward_cost.lower + backward_cost.lower,
        peak_bytes=peak_bytes,
        param_grad_bytes=param_grad_bytes,
        wall_ns_median=float(wall_ns),
        wall_ns_mean=float(wall_ns),
    )
    return AttackResult(
        perturbation=p,
        adversarial=adversarial,
        loss_trace=losses,
        final_loss=evaluate_loss(model, adversarial, labels) if cfg.evaluate_final else None,
        cost=cost,
    )


def fgsm(model: Model, x: Tensor, y, epsilon: float, mode: GradMode = GradMode.SEMI,
         clamp_range: Optional[tuple[float, float]] = None) -> AttackResult:
    """One signed step of size epsilon from zero."""
    cfg = AttackConfig(
        epsilon=epsilon, steps=1, step_rule=StepRule.SIGNED_GRAD, init=InitPolicy.ZERO,
        clamp_range=clamp_range, mode=mode,
    )
    return pgd(model, x, y, cfg)


def bim(model: Model, x: Tensor, y, cfg: AttackConfig, callback: Optional[StepCallback] = None) -> AttackResult:
    """Basic iterative method: pgd from zero with signed steps."""
    cfg = cfg.model_copy(update={"init": InitPolicy.ZERO, "step_rule": StepRule.SIGNED_GRAD})
    return pgd(model, x, y, cfg, callback)
