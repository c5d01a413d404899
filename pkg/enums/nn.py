from enum import Enum, IntEnum


class LayerKind(IntEnum):
    """Layer kinds. Values double as the checkpoint kind tag."""
    LINEAR = 1
    CONV2D = 2
    RELU = 3
    MAXPOOL2D = 4
    FLATTEN = 5


class Activation(str, Enum):
    RELU = "relu"
    IDENTITY = "identity"
