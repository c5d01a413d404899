import hypothesis
import numpy as np
import pytest

from models.layers import Linear, ReLU
from models.presets import build_preset
from models.sequential import Model
from repository.dataset_repository import DatasetRepository, SyntheticSpec
from tensor.rng import Rng
from tensor.tensor import Tensor

np.seterr(all="warn")

hypothesis.settings.register_profile("semigrad", max_examples=25, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile("semigrad")


def small_mlp(d_in: int = 5, hidden: int = 7, classes: int = 3, depth: int = 3, seed: int = 0) -> Model:
    rng = Rng(seed)
    layers, width = [], d_in
    for _ in range(depth - 1):
        layers += [Linear(width, hidden, rng=rng), ReLU()]
        width = hidden
    layers.append(Linear(width, classes, rng=rng))
    return Model(layers, input_shape=(d_in,))


@pytest.fixture
def mlp() -> Model:
    return small_mlp()


@pytest.fixture
def batch() -> tuple[Tensor, np.ndarray]:
    rng = Rng(11)
    x = rng.uniform((4, 5))
    y = rng.integers(0, 3, size=4)
    return x, y


@pytest.fixture
def image_batch() -> tuple[Tensor, np.ndarray]:
    rng = Rng(5)
    return rng.uniform((2, 1, 8, 8)), rng.integers(0, 3, size=2)


@pytest.fixture
def cnn() -> Model:
    return build_preset("cnn-small", (1, 8, 8), 3, seed=1)


@pytest.fixture(scope="session")
def blobs() -> tuple[np.ndarray, np.ndarray]:
    return DatasetRepository().synthetic(SyntheticSpec(n=200, classes=2, dim=2, spread=3.0, noise=0.5, seed=7))
