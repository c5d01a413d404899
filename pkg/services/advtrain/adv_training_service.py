"""
Adversarial training: K attack steps with parameter gradients turned off,
then one full forward/backward and optimizer step on the adversarial batch.
"""
import logging
import time
from fractions import Fraction
from typing import Optional

import numpy as np

from custom_utilities.custom_exception import ConfigError, NonFiniteError
from dto.request_dto.training import OptimizerConfig, TrainConfig
from dto.response_dto.cost import EpochReport, IterationCost
from enums.autodiff import GradMode, Phase
from models.sequential import Model
from services.advtrain.optimizer import SGD
from services.attacks.attack_service import pgd
from services.autodiff.accounting import flop_breakdown
from services.autodiff.engine import backward, forward, parameter_gradients_off
from tensor.rng import Rng
from tensor.tensor import Tensor

logger = logging.getLogger(__name__)


def theoretical_speedup(steps: int) -> Fraction:
    """(6K + 6) / (4K + 6): per-iteration cost without over with semi-backward attacks."""
    if steps < 1:
        raise ConfigError(f"K must be >= 1, got {steps}")
    return Fraction(6 * steps + 6, 4 * steps + 6)


def _train_iteration(model: Model, x: Tensor, y: np.ndarray, cfg: TrainConfig, optimizer: SGD) -> tuple[IterationCost, Tensor]:
    started = time.perf_counter_ns()
    if cfg.toggle_semi:
        with parameter_gradients_off(model):
            result = pgd(model, x, y, cfg.attack.model_copy(update={"mode": GradMode.SEMI, "evaluate_final": False}))
    else:
        result = pgd(model, x, y, cfg.attack.model_copy(update={"mode": GradMode.FULL, "evaluate_final": False}))

    loss, tape = forward(model, result.adversarial, y, GradMode.FULL)
    backward(tape)
    optimizer.step()
    optimizer.zero_grad()
    wall_ns = time.perf_counter_ns() - started

    update = flop_breakdown(tape, Phase.BOTH)
    attack_flops = result.cost.forward_flops + result.cost.backward_flops
    cost = IterationCost(
        attack_flops=attack_flops,
        update_flops=update.dominant,
        total_flops=attack_flops + update.dominant,
        wall_ns=wall_ns,
        attack_lower_flops=result.cost.lower_order_flops,
        update_lower_flops=update.lower,
        loss=loss,
    )
    return cost, result.adversarial


def adv_train_step(model: Model, x: Tensor, y, cfg: TrainConfig, optimizer: Optional[SGD] = None) -> IterationCost:
    """
    One iteration: save each parameter's requires-grad flag and turn all off,
    attack, restore the flags exactly, update on the adversarial batch, zero
    gradients.
    """
    if optimizer is None:
        optimizer = SGD(list(model.parameters()), cfg.optimizer)
    if not isinstance(x, Tensor):
        x = Tensor(x)
    cost, _ = _train_iteration(model, x, np.asarray(y), cfg, optimizer)
    return cost


def _batches(n: int, batch_size: int, rng: Rng) -> list[np.ndarray]:
    order = rng.permutation(n)
    return [order[start:start + batch_size] for start in range(0, n, batch_size)]


def adv_train(model: Model, features: np.ndarray, labels: np.ndarray, cfg: TrainConfig) -> list[EpochReport]:
    features = np.array(features, dtype=np.float64)
    labels = np.asarray(labels)
    optimizer = SGD(list(model.parameters()), cfg.optimizer)
    rng = Rng(cfg.seed)
    reports = []

    for epoch in range(cfg.epochs):
        totals = dict(attack_flops=0, update_flops=0, total_flops=0, wall_ns=0)
        losses = []
        batches = _batches(len(labels), cfg.batch_size, rng)
        for iteration, index in enumerate(batches):
            try:
                cost, adversarial = _train_iteration(model, Tensor(features[index]), labels[index], cfg, optimizer)
            except NonFiniteError as exc:
                logger.error("epoch %d aborted at iteration %d (K=%d, toggle_semi=%s): %s",
                             epoch, iteration, cfg.attack.steps, cfg.toggle_semi, exc.message)
                error = NonFiniteError(f"epoch {epoch} iteration {iteration}: {exc.message}")
                error.step = exc.step
                raise error from exc
            if cfg.accumulate_perturbation:
                features[index] = adversarial.data
            for key in totals:
                totals[key] += getattr(cost, key)
            losses.append(cost.loss)

        report = EpochReport(
            epoch=epoch, steps=cfg.attack.steps, toggle_semi=cfg.toggle_semi, iterations=len(batches),
            mean_loss=float(np.mean(losses)) if losses else 0.0, **totals,
        )
        logger.info("epoch %d K=%d semi=%s loss=%.4f flops=%d wall=%.3fs", epoch, report.steps,
                    report.toggle_semi, report.mean_loss, report.total_flops, report.wall_ns / 1e9)
        reports.append(report)
    return reports


def fit_clean(model: Model, features: np.ndarray, labels: np.ndarray, epochs: int,
              optimizer: OptimizerConfig = OptimizerConfig(), batch_size: int = 32, seed: int = 0) -> list[float]:
    """Standard training without attacks; returns the mean loss of each epoch."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    sgd = SGD(list(model.parameters()), optimizer)
    rng = Rng(seed)
    history = []
    for _ in range(epochs):
        losses = []
        for index in _batches(len(labels), batch_size, rng):
            loss, tape = forward(model, Tensor(features[index]), labels[index], GradMode.FULL)
            backward(tape)
            sgd.step()
            sgd.zero_grad()
            losses.append(loss)
        history.append(float(np.mean(losses)))
    return history
