"""
Dense float64 tensors.

A ``Tensor`` wraps a read-only, row-major (C-contiguous) numpy array. Every
operation exposed here checks its result for NaN/Inf and raises
``NonFiniteError`` instead of returning a poisoned value.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from custom_utilities.custom_exception import CustomException, NonFiniteError, ShapeMismatchError
from enums.tensor import ElementwiseOp

DTYPE = np.float64


class Tensor:
    __slots__ = ("_data",)

    def __init__(self, data, *, copy: bool = True):
        array = np.array(data, dtype=DTYPE, order="C", copy=copy or None)
        if array.ndim == 0:
            array = array.reshape(1)
        if not array.flags.c_contiguous:
            array = np.ascontiguousarray(array)
        if any(dim <= 0 for dim in array.shape):
            raise ShapeMismatchError("tensor dimensions must be positive", array.shape, None)
        check_finite(array, "tensor construction")
        array.flags.writeable = False
        self._data = array

    @classmethod
    def wrap(cls, array: np.ndarray) -> "Tensor":
        """Adopt ``array`` without copying when it is already float64 and contiguous."""
        return cls(array, copy=False)

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "Tensor":
        return cls.wrap(np.zeros(tuple(shape), dtype=DTYPE))

    @classmethod
    def eye(cls, n: int) -> "Tensor":
        return cls.wrap(np.eye(n, dtype=DTYPE))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def ndim(self) -> int:
        return self._data.ndim

    @property
    def size(self) -> int:
        return int(self._data.size)

    @property
    def nbytes(self) -> int:
        return int(self._data.nbytes)

    def numpy(self) -> np.ndarray:
        return self._data.copy()

    def reshape(self, *shape: int) -> "Tensor":
        try:
            return Tensor.wrap(self._data.reshape(*shape))
        except ValueError as exc:
            raise ShapeMismatchError("cannot reshape", self.shape, shape) from exc

    def bitwise_equal(self, other: "Tensor") -> bool:
        return self.shape == other.shape and self._data.tobytes() == other._data.tobytes()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, data={self._data!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._data, other._data))

    __hash__ = None


def check_finite(array: np.ndarray, where: str) -> None:
    if not np.isfinite(array).all():
        raise NonFiniteError(f"non-finite values produced by {where}")


def _as_array(value) -> np.ndarray | float:
    if isinstance(value, Tensor):
        return value.data
    if isinstance(value, (int, float, np.floating)):
        return float(value)
    raise CustomException(f"unsupported operand type {type(value).__name__}")


def ordered_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    ``a @ b`` with each output element summed over k strictly left to right.

    Vectorized over the (m, n) output only, so the result is bit-identical
    on every platform and BLAS build.
    """
    out = np.zeros((a.shape[0], b.shape[1]), dtype=DTYPE)
    term = np.empty_like(out)
    for index in range(a.shape[1]):
        np.multiply(a[:, index:index + 1], b[index], out=term)
        out += term
    return out


def ordered_sum(array: np.ndarray, axis: int = 0) -> np.ndarray:
    """Sum along ``axis``, adding slices in index order."""
    slices = np.moveaxis(np.asarray(array, dtype=DTYPE), axis, 0)
    out = np.zeros(slices.shape[1:], dtype=DTYPE)
    for piece in slices:
        out += piece
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of an m×k and a k×n tensor."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatchError("matmul inner dimensions disagree", a.shape, b.shape)
    out = ordered_dot(a.data, b.data)
    check_finite(out, "matmul")
    return Tensor.wrap(out)


def elementwise(op: ElementwiseOp | str, a: Tensor, b: Tensor | float | None = None,
                *, lo: float | None = None, hi: float | None = None) -> Tensor:
    """
    Elementwise arithmetic with scalar broadcast only.

    ``sign`` maps 0 to 0. ``clamp`` saturates to ``[lo, hi]``.
    """
    op = ElementwiseOp(op)
    left = a.data

    if op is ElementwiseOp.SIGN:
        out = np.sign(left)
    elif op is ElementwiseOp.CLAMP:
        if lo is None or hi is None or lo > hi:
            raise CustomException(f"clamp needs lo <= hi, got [{lo}, {hi}]")
        out = np.clip(left, lo, hi)
    else:
        if b is None:
            raise CustomException(f"{op.value} needs two operands")
        right = _as_array(b)
        if isinstance(right, np.ndarray) and right.shape != left.shape:
            if right.size != 1 or op is ElementwiseOp.HADAMARD:
                raise ShapeMismatchError(f"{op.value} operand shapes differ", left.shape, right.shape)
        if op is ElementwiseOp.ADD:
            out = left + right
        elif op is ElementwiseOp.SUB:
            out = left - right
        else:
            out = left * right

    check_finite(out, op.value)
    return Tensor.wrap(np.ascontiguousarray(out, dtype=DTYPE))


def add(a: Tensor, b: Tensor | float) -> Tensor:
    return elementwise(ElementwiseOp.ADD, a, b)


def sub(a: Tensor, b: Tensor | float) -> Tensor:
    return elementwise(ElementwiseOp.SUB, a, b)


def mul(a: Tensor, b: Tensor | float) -> Tensor:
    return elementwise(ElementwiseOp.MUL, a, b)


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    return elementwise(ElementwiseOp.HADAMARD, a, b)


def sign(a: Tensor) -> Tensor:
    return elementwise(ElementwiseOp.SIGN, a)


def clamp(a: Tensor, lo: float, hi: float) -> Tensor:
    return elementwise(ElementwiseOp.CLAMP, a, lo=lo, hi=hi)
