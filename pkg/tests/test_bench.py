from fractions import Fraction

import pytest

from dto.request_dto.attack import AttackConfig
from dto.request_dto.bench import BenchSpec
from dto.request_dto.training import OptimizerConfig
from enums.autodiff import GradMode
from models.presets import build_preset
from services.advtrain.adv_training_service import theoretical_speedup
from services.attacks.attack_service import pgd
from services.bench.bench_service import BenchService
from services.bench.timing import TimingStats, measure
from tensor.rng import Rng
def test_timing_stats():
    stats = TimingStats(samples_ns=[100, 110, 90, 100])
    assert stats.median == 100.0
    assert stats.mean == 100.0
    assert stats.std == pytest.approx(8.1650, rel=1e-4)
    assert not stats.noisy
    assert TimingStats(samples_ns=[100, 300, 100]).noisy


def test_measure_discards_warmup_runs():
    calls = []
    stats, result = measure(lambda: calls.append(len(calls)) or len(calls), repeats=3, warmup=2)
    assert len(calls) == 5
    assert len(stats.samples_ns) == 3
    assert result == 5


def test_bench_rows_are_stable_apart_from_wall_clock():
    spec = BenchSpec(models=["mlp-2x8"], batch_sizes=[2], steps=[2], repeats=3,
                     data="synthetic:n=4,classes=2,dim=4")
    first, second = BenchService().run_bench(spec), BenchService().run_bench(spec)
    wall = {"wall_ns_median", "wall_ns_std", "wall_ns_mean", "speedup", "status"}
    assert [row.model_dump(exclude=wall) for row in first] == [row.model_dump(exclude=wall) for row in second]


@pytest.mark.slow
def test_semi_backward_is_faster_on_the_deep_mlp():
    spec = BenchSpec(models=["mlp-8x1024"], batch_sizes=[16], steps=[50], repeats=10, warmup=1)
    rows = BenchService().run_bench(spec)
    (semi,) = [row for row in rows if row.mode == "semi"]
    assert semi.flop_ratio == 1.5
    assert semi.speedup >= 1.2


@pytest.mark.slow
def test_speedup_is_roughly_constant_across_steps():
    spec = BenchSpec(models=["mlp-8x1024"], batch_sizes=[16], steps=[10, 25, 50], repeats=5, warmup=1)
    speedups = [row.speedup for row in BenchService().run_bench(spec) if row.mode == "semi"]
    assert max(speedups) / min(speedups) < 1.10


def test_cnn_flop_ratio_is_constant_across_steps_and_batch():
    model = build_preset("cnn-small", (1, 8, 8), 3, seed=2)
    per_example_step = None
    for batch in (1, 2, 4):
        rng = Rng(batch)
        x, y = rng.uniform((batch, 1, 8, 8)), rng.integers(0, 3, size=batch)
        for steps in (1, 3, 5):
            cfg = AttackConfig(epsilon=0.05, steps=steps, clamp_range=(0.0, 1.0), evaluate_final=False)
            full = pgd(model, x, y, cfg.model_copy(update={"mode": GradMode.FULL}))
            semi = pgd(model, x, y, cfg.model_copy(update={"mode": GradMode.SEMI}))
            assert Fraction(full.cost.total_flops, semi.cost.total_flops) == Fraction(3, 2)
            cell = Fraction(semi.cost.total_flops, batch * steps)
            per_example_step = per_example_step or cell
            assert cell == per_example_step


@pytest.mark.slow
def test_speedup_is_roughly_constant_across_batch_sizes():
    spec = BenchSpec(models=["mlp-8x1024"], batch_sizes=[4, 8, 16, 32], steps=[10], repeats=5, warmup=1)
    speedups = [row.speedup for row in BenchService().run_bench(spec) if row.mode == "semi"]
    assert len(speedups) == 4
    assert min(speedups) > 1.0
    assert max(speedups) / min(speedups) < 1.3


@pytest.mark.slow
def test_epoch_time_ratio_grows_with_steps():
    steps_list = [1, 2, 5, 10]
    reports = BenchService().run_training(
        "mlp-6x512", "synthetic:n=64,classes=10,dim=256", steps_list, epochs=1, toggles=[True, False],
        optimizer=OptimizerConfig(lr=0.01), batch_size=32, epsilon=0.05,
    )
    wall = {(report.steps, report.toggle_semi): report.wall_ns for report in reports}
    flops = {(report.steps, report.toggle_semi): report.total_flops for report in reports}
    ratios = [wall[steps, False] / wall[steps, True] for steps in steps_list]
    for steps in steps_list:
        assert Fraction(flops[steps, False], flops[steps, True]) == theoretical_speedup(steps)
    assert ratios[-1] > ratios[0]
    assert ratios[-1] > 1.1
