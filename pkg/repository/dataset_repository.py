"""
Dataset ingestion.

Sources:
    ``synthetic[:key=value,...]``      seeded Gaussian blobs (see ``SyntheticSpec``)
    ``<images>.idx[,<labels>.idx]``    IDX image/label files (magic 0x803 / 0x801)
    ``<rows>.csv``                     rows of ``label,pix0,pix1,...``

Features come back as float64 in [0, 1]; labels as int64 in [0, C).
"""
import csv
import logging
import math
import struct
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from custom_utilities.custom_exception import ConfigError, DataLoadError
from tensor.rng import Rng

logger = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class SyntheticSpec(BaseModel):
    """Gaussian blobs; ``shape`` reshapes each point, e.g. ``1x8x8`` for images"""
    n: int = Field(100, ge=1)
    classes: int = Field(2, ge=2)
    dim: int = Field(2, ge=1)
    shape: tuple[int, ...] | None = None
    spread: float = Field(3.0, gt=0, description="Scale of the class centres")
    noise: float = Field(1.0, gt=0, description="Within-class standard deviation")
    seed: int = Field(7, ge=0)

    @classmethod
    def parse(cls, text: str) -> "SyntheticSpec":
        fields: dict = {}
        _, _, options = text.partition(":")
        for item in filter(None, (part.strip() for part in options.split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"synthetic option '{item}' is not key=value")
            if key == "shape":
                fields["shape"] = tuple(int(v) for v in value.split("x"))
            else:
                fields[key] = value
        try:
            spec = cls(**fields)
        except ValidationError as exc:
            raise ConfigError(f"invalid synthetic spec '{text}': {exc.errors()[0]['msg']}") from exc
        if spec.shape is not None:
            spec.dim = math.prod(spec.shape)
        return spec


class DatasetRepository:
    """Loads features and labels from files or synthetic specs"""

    def load(self, source: str) -> tuple[np.ndarray, np.ndarray]:
        source = source.strip()
        if source.startswith("synthetic"):
            features, labels = self.synthetic(SyntheticSpec.parse(source))
        elif source.lower().endswith(".csv"):
            features, labels = self.load_csv(source)
        else:
            images, _, labels_path = source.partition(",")
            features, labels = self.load_idx(images, labels_path or None)
        if len(labels) == 0:
            raise DataLoadError("dataset holds no examples", path=source)
        if len(features) != len(labels):
            raise DataLoadError(f"{len(features)} feature rows but {len(labels)} labels", path=source)
        logger.info("loaded %d examples of shape %s from %s", len(labels), features.shape[1:], source)
        return features, labels

    def synthetic(self, spec: SyntheticSpec) -> tuple[np.ndarray, np.ndarray]:
        rng = Rng(spec.seed)
        centres = rng.normal((spec.classes, spec.dim), scale=spec.spread).data
        labels = np.arange(spec.n, dtype=np.int64) % spec.classes
        labels = labels[rng.permutation(spec.n)]
        points = centres[labels] + rng.normal((spec.n, spec.dim), scale=spec.noise).data
        low, high = points.min(axis=0), points.max(axis=0)
        span = np.where(high > low, high - low, 1.0)
        features = (points - low) / span
        if spec.shape is not None:
            features = features.reshape((spec.n, *spec.shape))
        return features, labels

    def load_csv(self, path: str | Path) -> tuple[np.ndarray, np.ndarray]:
        rows, labels = [], []
        try:
            with open(path, newline="") as handle:
                for line_number, row in enumerate(csv.reader(handle)):
                    if not row:
                        continue
                    try:
                        values = [float(cell) for cell in row]
                    except ValueError as exc:
                        if line_number == 0:
                            continue  # header
                        raise DataLoadError(f"non-numeric value in row {line_number}", offset=line_number, path=path) from exc
                    if rows and len(values) - 1 != len(rows[0]):
                        raise DataLoadError(
                            f"row {line_number} has {len(values) - 1} pixels, expected {len(rows[0])}",
                            offset=line_number, path=path,
                        )
                    labels.append(values[0])
                    rows.append(values[1:])
        except OSError as exc:
            raise DataLoadError(f"cannot read csv: {exc.strerror}", path=path) from exc
        if not rows or not rows[0]:
            raise DataLoadError("csv holds no examples", offset=0, path=path)

        features = np.asarray(rows, dtype=np.float64)
        label_array = np.asarray(labels)
        if np.any(label_array < 0) or np.any(label_array != np.round(label_array)):
            raise DataLoadError("labels must be non-negative integers", path=path)
        if features.min() < 0:
            raise DataLoadError("negative pixel values", path=path)
        if features.max() > 1.0:
            features = features / 255.0
        return features, label_array.astype(np.int64)

    @staticmethod
    def _labels_path_for(images_path: Path) -> Path:
        name = images_path.name
        for old, new in (("images-idx3", "labels-idx1"), ("images", "labels")):
            if old in name:
                return images_path.with_name(name.replace(old, new))
        raise DataLoadError("cannot derive the labels file; pass '<images>,<labels>'", path=images_path)

    def load_idx(self, images_path: str | Path, labels_path: str | Path | None = None) -> tuple[np.ndarray, np.ndarray]:
        images_path = Path(images_path)
        labels_path = Path(labels_path) if labels_path else self._labels_path_for(images_path)
        images = self._read_idx(images_path, IDX_IMAGES_MAGIC, header_dims=3)
        labels = self._read_idx(labels_path, IDX_LABELS_MAGIC, header_dims=1)
        features = images.reshape(images.shape[0], 1, images.shape[1], images.shape[2]).astype(np.float64) / 255.0
        return features, labels.astype(np.int64)

    @staticmethod
    def _read_idx(path: Path, magic: int, header_dims: int) -> np.ndarray:
        try:
            blob = path.read_bytes()
        except OSError as exc:
            raise DataLoadError(f"cannot read idx file: {exc.strerror}", path=path) from exc
        header = 4 + 4 * header_dims
        if len(blob) < header:
            raise DataLoadError(f"header needs {header} bytes, file has {len(blob)}", offset=len(blob), path=path)
        (found,) = struct.unpack(">I", blob[:4])
        if found != magic:
            raise DataLoadError(f"bad magic 0x{found:08x}, expected 0x{magic:08x}", offset=0, path=path)
        dims = struct.unpack(f">{header_dims}I", blob[4:header])
        expected = math.prod(dims)
        if len(blob) - header != expected:
            raise DataLoadError(
                f"payload of {len(blob) - header} bytes does not match dims {dims} ({expected} bytes)",
                offset=header, path=path,
            )
        if expected == 0:
            return np.zeros(dims, dtype=np.uint8)
        return np.frombuffer(blob, dtype=np.uint8, offset=header).reshape(dims)
