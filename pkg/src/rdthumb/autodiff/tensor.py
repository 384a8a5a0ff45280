"""Reverse-mode automatic differentiation over dense numpy arrays.

A ``Tensor`` wraps an ndarray and, when it participates in gradient
computation, remembers which tensors produced it and how to push a
gradient back to them.  Calling :func:`backward` on a scalar tensor walks
the recorded graph once, in reverse topological order, and accumulates
gradients into every tensor that requires them.

The engine is deliberately small: explicit shapes only (no implicit
broadcasting), double precision by default, CPU.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

__all__ = ["Tensor", "backward", "parameter"]


class Tensor:
    """A dense n-dimensional value with optional gradient participation."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        self.data: np.ndarray = arr
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        # Set by ops: parent tensors and a vector-Jacobian product that maps
        # this node's gradient to one gradient (or None) per parent.
        self._parents: tuple = ()
        self._vjp: Optional[Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]] = None

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else _scalar_error(self)

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"

    # Operator sugar; the actual rules live in rdthumb.autodiff.ops.
    def __add__(self, other):
        from . import ops

        if isinstance(other, Tensor):
            return ops.add(self, other)
        return ops.add_scalar(self, float(other))

    def __radd__(self, other):
        from . import ops

        return ops.add_scalar(self, float(other))

    def __sub__(self, other):
        from . import ops

        if isinstance(other, Tensor):
            return ops.sub(self, other)
        return ops.add_scalar(self, -float(other))

    def __mul__(self, other):
        from . import ops

        if isinstance(other, Tensor):
            return ops.mul(self, other)
        return ops.mul_scalar(self, float(other))

    def __rmul__(self, other):
        from . import ops

        return ops.mul_scalar(self, float(other))

    def __truediv__(self, other):
        from . import ops

        if isinstance(other, Tensor):
            return ops.mul(self, ops.reciprocal(other))
        return ops.mul_scalar(self, 1.0 / float(other))

    def __neg__(self):
        from . import ops

        return ops.mul_scalar(self, -1.0)

    def __matmul__(self, other):
        from . import ops

        return ops.matmul(self, other)


def parameter(data, dtype=np.float64) -> Tensor:
    """A leaf tensor that collects gradients (a trainable parameter)."""
    return Tensor(np.asarray(data, dtype=dtype), requires_grad=True)


def _scalar_error(t: Tensor):
    raise ValueError(f"expected a scalar tensor, got shape {t.data.shape}")


def _topo_order(root: Tensor) -> list:
    """Iterative post-order over tensors that require gradients."""
    order: list = []
    seen: set = set()
    stack: list = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Populate ``.grad`` of every tensor the scalar ``loss`` depends on.

    Each call propagates a fresh unit seed and *adds* the resulting
    gradients to whatever is already stored, so two calls without a reset
    accumulate exactly twice the gradient.
    """
    if loss.data.size != 1:
        raise ValueError(f"backward requires a scalar loss, got shape {loss.data.shape}")
    if not loss.requires_grad:
        raise ValueError("loss is not connected to any tensor requiring gradients")

    order = _topo_order(loss)
    flowing: dict = {id(loss): np.ones_like(loss.data)}
    for node in reversed(order):
        g = flowing.pop(id(node), None)
        if g is None:
            continue
        node.grad = g if node.grad is None else node.grad + g
        if node._vjp is None:
            continue
        contribs = node._vjp(g)
        for parent, contrib in zip(node._parents, contribs):
            if contrib is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in flowing:
                flowing[key] = flowing[key] + contrib
            else:
                flowing[key] = contrib
