from pathlib import Path

import toml
from pydantic import BaseModel, Field, field_validator

from custom_utilities.custom_exception import ConfigError, DataLoadError

DEFAULT_BENCH_DATA = "synthetic:n=64,classes=10,shape=1x16x16"


class BenchSpec(BaseModel):
    """Benchmark grid: every (model, batch, K) is timed in full and semi mode"""
    models: list[str] = Field(default_factory=lambda: ["mlp-8x1024"], min_length=1)
    batch_sizes: list[int] = Field(default_factory=lambda: [16], min_length=1)
    steps: list[int] = Field(default_factory=lambda: [10], min_length=1)
    repeats: int = Field(10, ge=3, description="Timed runs R")
    warmup: int = Field(1, ge=1, description="Discarded runs before timing")
    epsilon: float = Field(8 / 255, ge=0)
    data: str = DEFAULT_BENCH_DATA
    seed: int = Field(0, ge=0)

    @field_validator("batch_sizes", "steps")
    @classmethod
    def all_positive(cls, values: list[int]) -> list[int]:
        if any(value < 1 for value in values):
            raise ValueError("batch sizes and K values must be >= 1")
        return values

    @classmethod
    def from_toml(cls, path: str | Path, **overrides) -> "BenchSpec":
        try:
            data = toml.load(path)
        except OSError as exc:
            raise DataLoadError(f"cannot read bench spec: {exc.strerror}", path=path) from exc
        except toml.TomlDecodeError as exc:
            raise ConfigError(f"{path}: invalid toml: {exc}") from exc
        data.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**data)
