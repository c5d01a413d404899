"""
Layer descriptions.

Layers hold their parameters and know their shapes; the arithmetic lives in
``services.nn`` and the tape construction in ``services.autodiff.engine``.
Shapes here exclude the batch dimension.
"""
import math

from custom_utilities.custom_exception import ShapeMismatchError
from enums.nn import LayerKind
from models.parameter import Parameter
from tensor.rng import Rng
from tensor.tensor import Tensor


class Layer:
    kind: LayerKind

    def __init__(self):
        self.params: list[Parameter] = []

    def output_shape(self, input_shape: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(input_shape)

    def dims(self) -> tuple[int, ...]:
        return ()

    def __repr__(self) -> str:
        return f"{type(self).__name__}{self.dims()}"


class Linear(Layer):
    kind = LayerKind.LINEAR

    def __init__(self, d_in: int, d_out: int, bias: bool = True, rng: Rng | None = None):
        super().__init__()
        if d_in < 1 or d_out < 1:
            raise ShapeMismatchError("linear dimensions must be positive", (d_in,), (d_out,))
        self.d_in = d_in
        self.d_out = d_out
        if rng is None:
            weight = Tensor.zeros((d_in, d_out))
        else:
            weight = rng.normal((d_in, d_out), scale=math.sqrt(2.0 / d_in))
        self.weight = Parameter(name="weight", value=weight)
        self.bias = Parameter(name="bias", value=Tensor.zeros((d_out,))) if bias else None
        self.params = [p for p in (self.weight, self.bias) if p is not None]

    @property
    def weight_count(self) -> int:
        return self.d_in * self.d_out

    def output_shape(self, input_shape):
        if tuple(input_shape) != (self.d_in,):
            raise ShapeMismatchError("linear input shape mismatch", input_shape, (self.d_in,))
        return (self.d_out,)

    def dims(self):
        return (self.d_in, self.d_out, int(self.bias is not None))


class Conv2d(Layer):
    """Cross-correlation with square kernels; weight layout (c_out, c_in, k, k)."""
    kind = LayerKind.CONV2D

    def __init__(self, c_in: int, c_out: int, k: int, stride: int = 1, pad: int = 0,
                 bias: bool = True, rng: Rng | None = None):
        super().__init__()
        if min(c_in, c_out, k, stride) < 1 or pad < 0:
            raise ShapeMismatchError("invalid conv2d geometry", (c_in, c_out, k), (stride, pad))
        self.c_in = c_in
        self.c_out = c_out
        self.k = k
        self.stride = stride
        self.pad = pad
        shape = (c_out, c_in, k, k)
        if rng is None:
            weight = Tensor.zeros(shape)
        else:
            weight = rng.normal(shape, scale=math.sqrt(2.0 / (c_in * k * k)))
        self.weight = Parameter(name="weight", value=weight)
        self.bias = Parameter(name="bias", value=Tensor.zeros((c_out,))) if bias else None
        self.params = [p for p in (self.weight, self.bias) if p is not None]

    @property
    def weight_count(self) -> int:
        return self.c_out * self.c_in * self.k * self.k

    def spatial_out(self, n: int) -> int:
        return (n + 2 * self.pad - self.k) // self.stride + 1

    def output_shape(self, input_shape):
        if len(input_shape) != 3 or input_shape[0] != self.c_in:
            raise ShapeMismatchError("conv2d input shape mismatch", input_shape, (self.c_in, "H", "W"))
        _, h, w = input_shape
        out_h, out_w = self.spatial_out(h), self.spatial_out(w)
        if out_h < 1 or out_w < 1:
            raise ShapeMismatchError("conv2d kernel larger than padded input", input_shape, (self.k, self.k))
        return (self.c_out, out_h, out_w)

    def dims(self):
        return (self.c_in, self.c_out, self.k, self.stride, self.pad, int(self.bias is not None))


class ReLU(Layer):
    kind = LayerKind.RELU


class MaxPool2d(Layer):
    """Non-overlapping k×k max pooling (stride k); trailing rows/cols are dropped."""
    kind = LayerKind.MAXPOOL2D

    def __init__(self, k: int):
        super().__init__()
        if k < 1:
            raise ShapeMismatchError("pool size must be positive", (k,), None)
        self.k = k

    def output_shape(self, input_shape):
        if len(input_shape) != 3 or input_shape[1] < self.k or input_shape[2] < self.k:
            raise ShapeMismatchError("maxpool input shape mismatch", input_shape, (self.k, self.k))
        c, h, w = input_shape
        return (c, h // self.k, w // self.k)

    def dims(self):
        return (self.k,)


class Flatten(Layer):
    kind = LayerKind.FLATTEN

    def output_shape(self, input_shape):
        return (math.prod(input_shape),)
