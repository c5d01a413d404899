from enum import Enum


class ElementwiseOp(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    HADAMARD = "hadamard"
    SIGN = "sign"
    CLAMP = "clamp"
