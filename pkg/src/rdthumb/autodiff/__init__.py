"""Minimal reverse-mode autodiff engine used by the trainable parts."""

from . import nn, ops, optim
from .ops import (absolute, add, add_scalar, clamp_min, clamp_passthrough,
                  concat, conv2d, exp, expand, laplace_interval_mass,
                  leaky_relu, log, log2, matmul, max_pool2x2, mean_, mul,
                  mul_scalar, narrow, permute, pixel_shuffle, pixel_unshuffle,
                  reciprocal, relu, reshape, softplus, square, stop_gradient,
                  sub, sum_)
from .optim import Adam, OptimizerState, adam_step
from .tensor import Tensor, backward, parameter

__all__ = [
    "Tensor", "backward", "parameter", "nn", "ops", "optim",
    "Adam", "OptimizerState", "adam_step",
    "absolute", "add", "add_scalar", "clamp_min", "clamp_passthrough",
    "concat", "conv2d", "exp", "expand", "laplace_interval_mass",
    "leaky_relu", "log", "log2", "matmul", "max_pool2x2", "mean_", "mul",
    "mul_scalar", "narrow", "permute", "pixel_shuffle", "pixel_unshuffle",
    "reciprocal", "relu", "reshape", "softplus", "square", "stop_gradient",
    "sub", "sum_",
]
