"""
Benchmark and sweep drivers behind the command line.

Measurements run strictly one after another; each (model, batch, K) cell is
timed in full and then semi mode on the same model and batch.
"""
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from custom_utilities.custom_exception import CustomException
from dto.request_dto.attack import AttackConfig
from dto.request_dto.bench import BenchSpec
from dto.request_dto.training import OptimizerConfig, TrainConfig
from dto.response_dto.bench import BenchRow
from dto.response_dto.cost import EpochReport
from enums.autodiff import GradMode
from enums.cli import ExitCode
from models.presets import build_preset
from models.sequential import Model, same_parameters
from repository.checkpoint_repository import CheckpointRepository
from repository.dataset_repository import DatasetRepository
from services.advtrain.adv_training_service import adv_train, theoretical_speedup
from services.attacks.attack_service import pgd
from services.bench.timing import measure
from tensor.tensor import Tensor

logger = logging.getLogger(__name__)

DATA_RANGE = (0.0, 1.0)


def take_batch(features: np.ndarray, labels: np.ndarray, batch: int) -> tuple[Tensor, np.ndarray]:
    """First ``batch`` examples, cycling through the data when it is smaller."""
    index = np.resize(np.arange(len(labels)), batch)
    return Tensor(features[index]), labels[index]


def num_classes_of(labels: np.ndarray) -> int:
    return max(2, int(labels.max()) + 1)


class BenchService:
    def __init__(self, datasets: DatasetRepository = DatasetRepository(),
                 checkpoints: CheckpointRepository = CheckpointRepository()):
        self.datasets = datasets
        self.checkpoints = checkpoints

    def load_model(self, name: str, input_shape: tuple[int, ...], num_classes: int, seed: int = 0) -> Model:
        """A checkpoint path when one exists on disk, a preset name otherwise."""
        path = Path(name)
        if path.suffix == ".sgck" or path.is_file():
            return self.checkpoints.load(path, input_shape=tuple(input_shape))
        return build_preset(name, tuple(input_shape), num_classes, seed=seed)

    def run_bench(self, spec: BenchSpec) -> list[BenchRow]:
        features, labels = self.datasets.load(spec.data)
        num_classes = num_classes_of(labels)
        rows: list[BenchRow] = []

        for name in spec.models:
            model = self.load_model(name, features.shape[1:], num_classes, spec.seed)
            for batch in spec.batch_sizes:
                x, y = take_batch(features, labels, batch)
                for steps in spec.steps:
                    rows.extend(self._measure_pair(model, name, x, y, steps, spec))
        return rows

    def _measure_pair(self, model: Model, name: str, x: Tensor, y: np.ndarray, steps: int, spec: BenchSpec) -> list[BenchRow]:
        measured = {}
        for mode in (GradMode.FULL, GradMode.SEMI):
            cfg = AttackConfig(epsilon=spec.epsilon, steps=steps, mode=mode, clamp_range=DATA_RANGE,
                               evaluate_final=False)
            stats, result = measure(lambda: pgd(model, x, y, cfg), spec.repeats, spec.warmup)
            measured[mode] = (stats, result)

        (full_stats, full), (semi_stats, semi) = measured[GradMode.FULL], measured[GradMode.SEMI]
        if full.perturbation_digest != semi.perturbation_digest:
            raise CustomException(
                f"{name} batch={x.shape[0]} K={steps}: full and semi perturbations differ",
                exit_code=ExitCode.NUMERIC_FAILURE,
            )

        speedup = full_stats.median / semi_stats.median if semi_stats.median > 0 else None
        flop_ratio = full.cost.total_flops / semi.cost.total_flops
        noisy = full_stats.noisy or semi_stats.noisy
        if noisy:
            logger.warning("%s batch=%d K=%d: timing too noisy for a speedup claim", name, x.shape[0], steps)
        else:
            logger.info("%s batch=%d K=%d: speedup %.3fx (flop ratio %.3f)", name, x.shape[0], steps, speedup, flop_ratio)

        rows = []
        for mode, (stats, result) in measured.items():
            is_semi = mode is GradMode.SEMI
            rows.append(BenchRow(
                model=name, batch=x.shape[0], K=steps, mode=mode.value,
                fwd_flops=result.cost.forward_flops, bwd_flops=result.cost.backward_flops,
                peak_bytes=result.cost.peak_bytes,
                wall_ns_median=stats.median, wall_ns_std=stats.std, wall_ns_mean=stats.mean,
                speedup=speedup if is_semi else None,
                flop_ratio=flop_ratio if is_semi else None,
                status=("noisy" if noisy else "ok") if is_semi else "",
            ))
        return rows

    def run_training(self, model_name: str, data: str, steps_list: list[int], epochs: int,
                     toggles: list[bool], optimizer: OptimizerConfig, batch_size: int,
                     epsilon: float, eta: Optional[float] = None, seed: int = 0,
                     verify: bool = False, save_path: Optional[str] = None) -> list[EpochReport]:
        features, labels = self.datasets.load(data)
        num_classes = num_classes_of(labels)
        if verify:
            toggles = [True, False]
        reports: list[EpochReport] = []
        trained: Optional[Model] = None

        for steps in steps_list:
            finals: dict[bool, Model] = {}
            for toggle in toggles:
                model = self.load_model(model_name, features.shape[1:], num_classes, seed)
                cfg = TrainConfig(
                    attack=AttackConfig(epsilon=epsilon, eta=eta, steps=steps, clamp_range=DATA_RANGE),
                    optimizer=optimizer, epochs=epochs, batch_size=batch_size,
                    toggle_semi=toggle, seed=seed,
                )
                for report in adv_train(model, features, labels, cfg):
                    report.theoretical_speedup = float(theoretical_speedup(steps))
                    reports.append(report)
                finals[toggle] = model
                trained = model

            if verify:
                if not same_parameters(finals[True], finals[False]):
                    raise CustomException(f"K={steps}: models differ between toggle settings",
                                          exit_code=ExitCode.NUMERIC_FAILURE)
                logger.info("K=%d: models identical", steps)

        if save_path and trained is not None:
            self.checkpoints.save(trained, save_path)
        return reports
