from typing import Sequence

import numpy as np

from tensor.tensor import Tensor


class Rng:
    """Seeded generator; identical seeds give identical streams."""
    algorithm = "PCG64"

    def __init__(self, seed: int = 0):
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def normal(self, shape: Sequence[int], scale: float = 1.0, loc: float = 0.0) -> Tensor:
        return Tensor.wrap(self._generator.normal(loc, scale, size=tuple(shape)))

    def uniform(self, shape: Sequence[int], low: float = 0.0, high: float = 1.0) -> Tensor:
        return Tensor.wrap(self._generator.uniform(low, high, size=tuple(shape)))

    def integers(self, low: int, high: int, size: int) -> np.ndarray:
        return self._generator.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)
