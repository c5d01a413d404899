from typing import Iterator

from custom_utilities.custom_exception import ShapeMismatchError
from models.layers import Layer
from models.parameter import Parameter


class Model:
    """
    An ordered stack of layers ending in logits.

    When ``input_shape`` is given, adjacent layer shapes are checked at
    construction and every forward input is checked against it.
    """

    def __init__(self, layers: list[Layer], input_shape: tuple[int, ...] | None = None, name: str = "model"):
        self.layers = list(layers)
        self.name = name
        self.input_shape = tuple(input_shape) if input_shape is not None else None
        for index, layer in enumerate(self.layers):
            for param in layer.params:
                param.name = f"{index}.{param.name.split('.')[-1]}"
        if self.input_shape is not None:
            self.output_shape = self.trace_shapes(self.input_shape)[-1]

    def trace_shapes(self, input_shape: tuple[int, ...]) -> list[tuple[int, ...]]:
        shapes = [tuple(input_shape)]
        for layer in self.layers:
            shapes.append(layer.output_shape(shapes[-1]))
        return shapes

    def check_input(self, shape: tuple[int, ...]) -> None:
        if self.input_shape is not None and tuple(shape[1:]) != self.input_shape:
            raise ShapeMismatchError("input does not match the model's first layer", shape[1:], self.input_shape)

    def parameters(self) -> Iterator[Parameter]:
        for layer in self.layers:
            yield from layer.params

    def named_parameters(self) -> dict[str, Parameter]:
        return {param.name: param for param in self.parameters()}

    def parameter_count(self) -> int:
        return sum(param.value.size for param in self.parameters())

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.grad = None

    def __repr__(self) -> str:
        return f"Model({self.name}, layers={self.layers})"


def same_parameters(left: Model, right: Model) -> bool:
    """Bitwise equality of every parameter value, in model order."""
    left_params, right_params = list(left.parameters()), list(right.parameters())
    return len(left_params) == len(right_params) and all(
        a.value.bitwise_equal(b.value) for a, b in zip(left_params, right_params)
    )
