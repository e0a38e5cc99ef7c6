"""Minimal reverse-mode automatic differentiation over numpy arrays.

Each ``Tensor`` wraps one ndarray and remembers how it was produced; calling
``backward()`` on a scalar result walks the recorded graph in reverse
topological order and accumulates gradients into every tensor created with
``requires_grad=True``.  Only the operations the model needs are provided;
all support broadcasting where numpy does.
"""
from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` over the axes numpy broadcast to reach ``grad.shape``."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: tuple["Tensor", ...] = (),
        _backward: Callable[[np.ndarray], None] | None = None,
    ):
        if isinstance(data, np.ndarray):
            self.data = data
        elif isinstance(data, np.generic):  # 0-d reduction results keep their dtype
            self.data = np.asarray(data)
        else:
            self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self._parents = _parents if self.requires_grad else ()
        self._backward = _backward if self.requires_grad else None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def _accumulate(self, grad: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    # -- graph construction helpers --

    def _lift(self, value) -> "Tensor":
        # Python scalars adopt this tensor's dtype so f32 graphs stay f32.
        if isinstance(value, Tensor):
            return value
        return Tensor(np.asarray(value, dtype=self.data.dtype))

    def _unary(self, out_data: np.ndarray, grad_fn: Callable[[np.ndarray], np.ndarray]) -> "Tensor":
        def backward(g: np.ndarray):
            self._accumulate(grad_fn(g))

        return Tensor(out_data, _parents=(self,), _backward=backward)

    # -- arithmetic --

    def __add__(self, other) -> "Tensor":
        other = self._lift(other)
        out_data = self.data + other.data

        def backward(g: np.ndarray):
            self._accumulate(_unbroadcast(g, self.data.shape))
            other._accumulate(_unbroadcast(g, other.data.shape))

        return Tensor(out_data, _parents=(self, other), _backward=backward)

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return self._unary(-self.data, lambda g: -g)

    def __sub__(self, other) -> "Tensor":
        other = self._lift(other)
        out_data = self.data - other.data

        def backward(g: np.ndarray):
            self._accumulate(_unbroadcast(g, self.data.shape))
            other._accumulate(_unbroadcast(-g, other.data.shape))

        return Tensor(out_data, _parents=(self, other), _backward=backward)

    def __rsub__(self, other) -> "Tensor":
        return self._lift(other) - self

    def __mul__(self, other) -> "Tensor":
        other = self._lift(other)
        out_data = self.data * other.data

        def backward(g: np.ndarray):
            self._accumulate(_unbroadcast(g * other.data, self.data.shape))
            other._accumulate(_unbroadcast(g * self.data, other.data.shape))

        return Tensor(out_data, _parents=(self, other), _backward=backward)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = self._lift(other)
        out_data = self.data / other.data

        def backward(g: np.ndarray):
            self._accumulate(_unbroadcast(g / other.data, self.data.shape))
            other._accumulate(
                _unbroadcast(-g * self.data / (other.data * other.data), other.data.shape)
            )

        return Tensor(out_data, _parents=(self, other), _backward=backward)

    def __rtruediv__(self, other) -> "Tensor":
        return self._lift(other) / self

    def matmul(self, other: "Tensor") -> "Tensor":
        other = self._lift(other)
        out_data = self.data @ other.data

        def backward(g: np.ndarray):
            self._accumulate(g @ other.data.T)
            other._accumulate(self.data.T @ g)

        return Tensor(out_data, _parents=(self, other), _backward=backward)

    __matmul__ = matmul

    def transpose(self) -> "Tensor":
        return self._unary(self.data.T, lambda g: g.T)

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def reshape(self, *shape: int) -> "Tensor":
        src = self.data.shape
        return self._unary(self.data.reshape(*shape), lambda g: g.reshape(src))

    # -- nonlinearities --

    def relu(self) -> "Tensor":
        mask = self.data > 0
        return self._unary(self.data * mask, lambda g: g * mask)

    def sigmoid(self) -> "Tensor":
        x = self.data
        out_data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        return self._unary(out_data, lambda g: g * out_data * (1.0 - out_data))

    def exp(self) -> "Tensor":
        out_data = np.exp(self.data)
        return self._unary(out_data, lambda g: g * out_data)

    def log(self) -> "Tensor":
        return self._unary(np.log(self.data), lambda g: g / self.data)

    def sqrt(self) -> "Tensor":
        out_data = np.sqrt(self.data)
        return self._unary(out_data, lambda g: g * 0.5 / out_data)

    def clip(self, lo: float, hi: float) -> "Tensor":
        # Gradient passes only strictly inside the interval.
        inside = (self.data > lo) & (self.data < hi)
        return self._unary(np.clip(self.data, lo, hi), lambda g: g * inside)

    # -- reductions --

    def sum(self, axis: int | None = None, keepdims: bool = False) -> "Tensor":
        out_data = self.data.sum(axis=axis, keepdims=keepdims)
        src_shape = self.data.shape

        def grad_fn(g: np.ndarray) -> np.ndarray:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return np.broadcast_to(g, src_shape).copy()

        return self._unary(out_data, grad_fn)

    def mean(self, axis: int | None = None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # -- structure --

    def slice_rows(self, start: int, end: int) -> "Tensor":
        src_shape = self.data.shape

        def grad_fn(g: np.ndarray) -> np.ndarray:
            full = np.zeros(src_shape, dtype=g.dtype)
            full[start:end] = g
            return full

        return self._unary(self.data[start:end], grad_fn)

    def take_rows(self, indices: Sequence[int] | np.ndarray) -> "Tensor":
        idx = np.asarray(indices, dtype=np.intp)
        src_shape = self.data.shape

        def grad_fn(g: np.ndarray) -> np.ndarray:
            full = np.zeros(src_shape, dtype=g.dtype)
            np.add.at(full, idx, g)
            return full

        return self._unary(self.data[idx], grad_fn)

    # -- backward pass --

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar output")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))

        self._accumulate(np.ones_like(self.data))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g: np.ndarray):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            t._accumulate(g[tuple(idx)])

    return Tensor(out_data, _parents=tuple(tensors), _backward=backward)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Composed from primitives; the max shift is a constant, which leaves
    the gradient unchanged."""
    shift = Tensor(x.data.max(axis=axis, keepdims=True))
    e = (x - shift).exp()
    return e / e.sum(axis=axis, keepdims=True)


def zero_grads(tensors: Iterable[Tensor]) -> None:
    for t in tensors:
        t.grad = None
