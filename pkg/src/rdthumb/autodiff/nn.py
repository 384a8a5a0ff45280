"""Thin layer wrappers over the primitive ops: parameter storage plus a
forward method.  Parameters are reported as (name, Tensor) pairs so
checkpoints and optimizers can address them uniformly.
"""

from __future__ import annotations

import numpy as np

from . import ops
from .tensor import Tensor, parameter

__all__ = ["Linear", "Conv2d", "collect_params", "load_params", "count_params"]


class Linear:
    """Affine map on (N, in_features) row batches."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator,
                 zero_init: bool = False, dtype=np.float64):
        if zero_init:
            w = np.zeros((in_features, out_features))
        else:
            std = np.sqrt(2.0 / in_features)
            w = rng.normal(0.0, std, size=(in_features, out_features))
        self.w = parameter(w, dtype)
        self.b = parameter(np.zeros(out_features), dtype)

    def __call__(self, x: Tensor) -> Tensor:
        y = ops.matmul(x, self.w)
        bias = ops.expand(ops.reshape(self.b, (1, self.b.shape[0])), y.shape)
        return ops.add(y, bias)

    def params(self):
        return [("w", self.w), ("b", self.b)]


class Conv2d:
    """3x3-style conv layer; weights use He initialization unless zeroed."""

    def __init__(self, in_ch: int, out_ch: int, kernel: int = 3, stride: int = 1,
                 pad: int | None = None, rng: np.random.Generator | None = None,
                 zero_init: bool = False, bias_fill: float = 0.0, dtype=np.float64):
        if pad is None:
            pad = kernel // 2
        self.stride = stride
        self.pad = pad
        if zero_init:
            w = np.zeros((out_ch, in_ch, kernel, kernel))
        else:
            std = np.sqrt(2.0 / (in_ch * kernel * kernel))
            w = rng.normal(0.0, std, size=(out_ch, in_ch, kernel, kernel))
        self.w = parameter(w, dtype)
        self.b = parameter(np.full(out_ch, bias_fill, dtype=np.float64), dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.w, self.b, stride=self.stride, pad=self.pad)

    def params(self):
        return [("w", self.w), ("b", self.b)]


def collect_params(module, prefix: str = "") -> list:
    """Flatten a module tree into [(dotted_name, Tensor), ...].

    A module is anything with ``params()``; lists/tuples of modules are
    walked with numeric path components.
    """
    out = []
    if isinstance(module, (list, tuple)):
        for i, m in enumerate(module):
            out.extend(collect_params(m, f"{prefix}{i}."))
        return out
    for name, item in module.params():
        full = f"{prefix}{name}"
        if isinstance(item, Tensor):
            out.append((full, item))
        else:
            out.extend(collect_params(item, full + "."))
    return out


def load_params(module, arrays: dict, prefix: str = "") -> None:
    """Copy named arrays into a module tree in place."""
    for name, tensor in collect_params(module, prefix):
        if name not in arrays:
            raise KeyError(f"checkpoint missing parameter {name!r}")
        src = np.asarray(arrays[name])
        if src.shape != tensor.data.shape:
            raise ValueError(f"parameter {name!r}: shape {src.shape} != {tensor.data.shape}")
        tensor.data = src.astype(tensor.data.dtype)


def count_params(module) -> int:
    return sum(t.data.size for _, t in collect_params(module))
