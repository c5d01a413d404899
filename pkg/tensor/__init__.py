from tensor.tensor import Tensor, matmul, elementwise, add, sub, mul, hadamard, sign, clamp
from tensor.rng import Rng

__all__ = ["Tensor", "Rng", "matmul", "elementwise", "add", "sub", "mul", "hadamard", "sign", "clamp"]
