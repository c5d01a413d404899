from enum import Enum


class GradMode(str, Enum):
    FULL = "full"
    SEMI = "semi"

    def __str__(self) -> str:
        return self.value


class Phase(str, Enum):
    FORWARD_ONLY = "forward_only"
    BACKWARD_ONLY = "backward_only"
    BOTH = "both"


class OpKind(str, Enum):
    """Kinds of records a tape can hold.

    ``*_PARAM_GRAD`` records compute parameter gradients and are the only
    ones a semi-backward tape never contains.
    """
    LINEAR_OUTPUT_GRAD = "linear_output_grad"
    LINEAR_PARAM_GRAD = "linear_param_grad"
    CONV_OUTPUT_GRAD = "conv_output_grad"
    CONV_PARAM_GRAD = "conv_param_grad"
    RELU = "relu"
    MAXPOOL = "maxpool"
    FLATTEN = "flatten"
    CROSS_ENTROPY = "cross_entropy"

    @property
    def is_param_grad(self) -> bool:
        return self in (OpKind.LINEAR_PARAM_GRAD, OpKind.CONV_PARAM_GRAD)
