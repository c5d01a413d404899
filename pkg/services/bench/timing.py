import statistics
import time
from typing import Callable

from pydantic import BaseModel

NOISE_THRESHOLD = 0.15


class TimingStats(BaseModel):
    """Wall-clock samples of the timed (post-warmup) runs"""
    samples_ns: list[int]

    @property
    def median(self) -> float:
        return float(statistics.median(self.samples_ns))

    @property
    def mean(self) -> float:
        return float(statistics.fmean(self.samples_ns))

    @property
    def std(self) -> float:
        return float(statistics.stdev(self.samples_ns)) if len(self.samples_ns) > 1 else 0.0

    @property
    def noisy(self) -> bool:
        return self.median <= 0 or self.std / self.median >= NOISE_THRESHOLD


def measure(run: Callable[[], object], repeats: int, warmup: int) -> tuple[TimingStats, object]:
    """Discard ``warmup`` runs, then time ``repeats`` runs; returns the stats and the last result."""
    result = None
    for _ in range(warmup):
        result = run()
    samples = []
    for _ in range(repeats):
        started = time.perf_counter_ns()
        result = run()
        samples.append(time.perf_counter_ns() - started)
    return TimingStats(samples_ns=samples), result
