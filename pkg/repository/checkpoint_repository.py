"""
Model checkpoints.

Layout (little-endian):
    b"SGCK" | version u16 | layer count u32
    per layer: kind tag u8 | dim count u8 | dims u32 * n | parameter blobs (float64, model order)
"""
import logging
import struct
from pathlib import Path

import numpy as np

from custom_utilities.custom_exception import DataLoadError, ShapeMismatchError
from enums.nn import LayerKind
from models.layers import Conv2d, Flatten, Layer, Linear, MaxPool2d, ReLU
from models.sequential import Model
from tensor.tensor import Tensor

logger = logging.getLogger(__name__)

MAGIC = b"SGCK"
VERSION = 1


def _build_layer(kind: LayerKind, dims: tuple[int, ...]) -> Layer:
    if kind is LayerKind.LINEAR:
        d_in, d_out, has_bias = dims
        return Linear(d_in, d_out, bias=bool(has_bias))
    if kind is LayerKind.CONV2D:
        c_in, c_out, k, stride, pad, has_bias = dims
        return Conv2d(c_in, c_out, k, stride=stride, pad=pad, bias=bool(has_bias))
    if kind is LayerKind.RELU:
        return ReLU()
    if kind is LayerKind.MAXPOOL2D:
        return MaxPool2d(*dims)
    return Flatten()


class CheckpointRepository:
    """Reads and writes models in the SGCK format"""

    def dumps(self, model: Model) -> bytes:
        chunks = [MAGIC, struct.pack("<HI", VERSION, len(model.layers))]
        for layer in model.layers:
            dims = layer.dims()
            chunks.append(struct.pack(f"<BB{len(dims)}I", int(layer.kind), len(dims), *dims))
            for param in layer.params:
                chunks.append(param.value.data.astype("<f8").tobytes())
        return b"".join(chunks)

    def loads(self, blob: bytes, source: str = "<bytes>", input_shape: tuple[int, ...] | None = None) -> Model:
        view = memoryview(blob)
        offset = 0

        def take(size: int) -> memoryview:
            nonlocal offset
            if offset + size > len(view):
                raise DataLoadError(f"truncated checkpoint, needed {size} bytes", offset=offset, path=source)
            chunk = view[offset:offset + size]
            offset += size
            return chunk

        if bytes(take(4)) != MAGIC:
            raise DataLoadError("bad checkpoint magic", offset=0, path=source)
        version, count = struct.unpack("<HI", take(6))
        if version != VERSION:
            raise DataLoadError(f"unsupported checkpoint version {version}", offset=4, path=source)

        layers = []
        for _ in range(count):
            tag_offset = offset
            tag, ndims = struct.unpack("<BB", take(2))
            try:
                kind = LayerKind(tag)
            except ValueError as exc:
                raise DataLoadError(f"unknown layer kind tag {tag}", offset=tag_offset, path=source) from exc
            dims = struct.unpack(f"<{ndims}I", take(4 * ndims))
            try:
                layer = _build_layer(kind, dims)
            except (TypeError, ValueError, ShapeMismatchError) as exc:
                raise DataLoadError(f"bad dims {dims} for {kind.name}", offset=tag_offset, path=source) from exc
            for param in layer.params:
                count_values = param.value.size
                values = np.frombuffer(take(8 * count_values), dtype="<f8").astype(np.float64)
                param.value = Tensor(values.reshape(param.shape))
            layers.append(layer)

        if offset != len(view):
            raise DataLoadError(f"{len(view) - offset} trailing bytes", offset=offset, path=source)
        return Model(layers, input_shape=input_shape, name=Path(source).stem)

    def save(self, model: Model, path: str | Path) -> None:
        try:
            Path(path).write_bytes(self.dumps(model))
        except OSError as exc:
            raise DataLoadError(f"cannot write checkpoint: {exc.strerror}", path=path) from exc
        logger.info("checkpoint written to %s (%d parameters)", path, model.parameter_count())

    def load(self, path: str | Path, input_shape: tuple[int, ...] | None = None) -> Model:
        try:
            blob = Path(path).read_bytes()
        except OSError as exc:
            raise DataLoadError(f"cannot read checkpoint: {exc.strerror}", path=path) from exc
        return self.loads(blob, source=str(path), input_shape=input_shape)
