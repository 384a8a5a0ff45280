"""Differentiable primitives.

Every op validates shapes eagerly (no implicit broadcasting; use
:func:`expand` to state a broadcast explicitly) and registers a
vector-Jacobian product on its output tensor.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor import Tensor

__all__ = [
    "add", "sub", "mul", "add_scalar", "mul_scalar", "matmul", "conv2d",
    "relu", "leaky_relu", "softplus", "absolute", "square", "reciprocal",
    "exp", "log", "log2", "concat", "sum_", "mean_", "reshape", "permute",
    "expand", "narrow", "clamp_passthrough", "clamp_min", "pixel_shuffle",
    "pixel_unshuffle", "max_pool2x2", "stop_gradient", "laplace_interval_mass",
]


def _result(data, parents, vjp, requires: bool) -> Tensor:
    out = Tensor(data, requires_grad=requires)
    if requires:
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def _need(*tensors: Tensor) -> bool:
    return any(t.requires_grad for t in tensors)


def _same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.data.shape != b.data.shape:
        raise ValueError(f"{op}: shape mismatch {a.data.shape} vs {b.data.shape}")


# ---------------------------------------------------------------------------
# elementwise arithmetic

def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "add")
    return _result(a.data + b.data, (a, b), lambda g: (g, g), _need(a, b))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "sub")
    return _result(a.data - b.data, (a, b), lambda g: (g, -g), _need(a, b))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "mul")
    ad, bd = a.data, b.data
    return _result(ad * bd, (a, b), lambda g: (g * bd, g * ad), _need(a, b))


def add_scalar(a: Tensor, c: float) -> Tensor:
    return _result(a.data + c, (a,), lambda g: (g,), _need(a))


def mul_scalar(a: Tensor, c: float) -> Tensor:
    return _result(a.data * c, (a,), lambda g: (g * c,), _need(a))


def absolute(a: Tensor) -> Tensor:
    sign = np.sign(a.data)
    return _result(np.abs(a.data), (a,), lambda g: (g * sign,), _need(a))


def square(a: Tensor) -> Tensor:
    ad = a.data
    return _result(ad * ad, (a,), lambda g: (g * (2.0 * ad),), _need(a))


def reciprocal(a: Tensor) -> Tensor:
    inv = 1.0 / a.data
    return _result(inv, (a,), lambda g: (-g * inv * inv,), _need(a))


def exp(a: Tensor) -> Tensor:
    e = np.exp(a.data)
    return _result(e, (a,), lambda g: (g * e,), _need(a))


def log(a: Tensor) -> Tensor:
    ad = a.data
    return _result(np.log(ad), (a,), lambda g: (g / ad,), _need(a))


_LN2 = float(np.log(2.0))


def log2(a: Tensor) -> Tensor:
    ad = a.data
    return _result(np.log2(ad), (a,), lambda g: (g / (ad * _LN2),), _need(a))


# ---------------------------------------------------------------------------
# nonlinearities

def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return _result(np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,), _need(a))


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    factor = np.where(a.data > 0, 1.0, slope)
    return _result(a.data * factor, (a,), lambda g: (g * factor,), _need(a))


def softplus(a: Tensor) -> Tensor:
    # log(1 + e^x), computed as max(x, 0) + log1p(e^-|x|) for stability.
    ad = a.data
    e = np.exp(-np.abs(ad))
    val = np.maximum(ad, 0.0) + np.log1p(e)
    sig = np.where(ad >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return _result(val, (a,), lambda g: (g * sig,), _need(a))


# ---------------------------------------------------------------------------
# clamps

def clamp_passthrough(a: Tensor, lo: float, hi: float) -> Tensor:
    """Clip values to [lo, hi]; the gradient is identity everywhere
    (straight-through), including at and beyond the boundaries."""
    return _result(np.clip(a.data, lo, hi), (a,), lambda g: (g,), _need(a))


def clamp_min(a: Tensor, lo: float) -> Tensor:
    """Lower clamp with the usual subgradient (zero where clamped)."""
    mask = a.data > lo
    return _result(np.where(mask, a.data, lo), (a,), lambda g: (g * mask,), _need(a))


def stop_gradient(a: Tensor) -> Tensor:
    """A constant copy of ``a``; no gradient flows to ``a``."""
    return Tensor(a.data.copy())


# ---------------------------------------------------------------------------
# shape manipulation

def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    old = a.data.shape
    return _result(a.data.reshape(shape), (a,), lambda g: (g.reshape(old),), _need(a))


def permute(a: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    inv = tuple(np.argsort(axes))
    return _result(np.transpose(a.data, axes), (a,),
                   lambda g: (np.transpose(g, inv),), _need(a))


def expand(a: Tensor, shape) -> Tensor:
    """Explicit broadcast of ``a`` to ``shape`` (numpy broadcast rules,
    stated at the call site).  Backward sums over the expanded axes."""
    shape = tuple(shape)
    old = a.data.shape
    try:
        data = np.broadcast_to(a.data, shape).copy()
    except ValueError as err:
        raise ValueError(f"expand: cannot broadcast {old} to {shape}") from err

    n_new = len(shape) - len(old)

    def vjp(g):
        if n_new:
            g = g.sum(axis=tuple(range(n_new)))
        keep = tuple(i for i, d in enumerate(old) if d == 1 and g.shape[i] != 1)
        if keep:
            g = g.sum(axis=keep, keepdims=True)
        return (g.reshape(old),)

    return _result(data, (a,), vjp, _need(a))


def narrow(a: Tensor, axis: int, start: int, length: int) -> Tensor:
    """Slice ``length`` entries from ``start`` along ``axis``."""
    if not (0 <= start and start + length <= a.data.shape[axis]):
        raise ValueError(f"narrow: [{start}:{start + length}] out of range for "
                         f"axis {axis} of shape {a.data.shape}")
    index = [slice(None)] * a.data.ndim
    index[axis] = slice(start, start + length)
    index = tuple(index)
    shape = a.data.shape

    def vjp(g):
        full = np.zeros(shape, dtype=g.dtype)
        full[index] = g
        return (full,)

    return _result(a.data[index].copy(), (a,), vjp, _need(a))


def concat(tensors, axis: int) -> Tensor:
    tensors = tuple(tensors)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        outs = []
        index = [slice(None)] * g.ndim
        for i in range(len(tensors)):
            index[axis] = slice(int(offsets[i]), int(offsets[i + 1]))
            outs.append(g[tuple(index)])
        return tuple(outs)

    data = np.concatenate([t.data for t in tensors], axis=axis)
    return _result(data, tensors, vjp, _need(*tensors))


# ---------------------------------------------------------------------------
# reductions

def sum_(a: Tensor, axis=None) -> Tensor:
    if axis is None:
        return _sum_all(a)
    return _sum_axis(a, int(axis))


def _sum_all(a: Tensor) -> Tensor:
    shape = a.data.shape
    return _result(np.asarray(a.data.sum()), (a,),
                   lambda g: (np.full(shape, float(g), dtype=a.data.dtype),), _need(a))


def _sum_axis(a: Tensor, axis: int) -> Tensor:
    shape = a.data.shape

    def vjp(g):
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

    return _result(a.data.sum(axis=axis), (a,), vjp, _need(a))


def mean_(a: Tensor, axis=None) -> Tensor:
    if axis is None:
        return mul_scalar(_sum_all(a), 1.0 / a.data.size)
    return mul_scalar(_sum_axis(a, int(axis)), 1.0 / a.data.shape[int(axis)])


# ---------------------------------------------------------------------------
# linear algebra / convolution

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError(f"matmul: expects 2-d operands, got {a.data.shape} @ {b.data.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ValueError(f"matmul: inner dims differ {a.data.shape} @ {b.data.shape}")
    ad, bd = a.data, b.data
    return _result(ad @ bd, (a, b), lambda g: (g @ bd.T, ad.T @ g), _need(a, b))


def _im2col(data: np.ndarray, kh: int, kw: int, stride: int):
    """(B,C,H,W) -> (B*Ho*Wo, C*kh*kw) patch matrix."""
    B, C = data.shape[:2]
    win = sliding_window_view(data, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    Ho, Wo = win.shape[2], win.shape[3]
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(B * Ho * Wo, C * kh * kw)
    return cols, Ho, Wo


def conv2d(x: Tensor, w: Tensor, b: Tensor | None = None,
           stride: int = 1, pad: int = 0) -> Tensor:
    """2-d cross-correlation on (B, C, H, W) with zero padding.

    ``w`` is (C_out, C_in, kh, kw); ``b``, when given, is (C_out,).
    """
    if x.data.ndim != 4:
        raise ValueError(f"conv2d: input must be (B,C,H,W), got {x.data.shape}")
    if w.data.ndim != 4:
        raise ValueError(f"conv2d: weight must be (Co,Ci,kh,kw), got {w.data.shape}")
    B, Cin, H, W = x.data.shape
    Cout, Cin2, kh, kw = w.data.shape
    if Cin != Cin2:
        raise ValueError(f"conv2d: channel mismatch, input {x.data.shape} vs weight {w.data.shape}")
    if b is not None and b.data.shape != (Cout,):
        raise ValueError(f"conv2d: bias must be ({Cout},), got {b.data.shape}")

    xp = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x.data
    Hp, Wp = xp.shape[2], xp.shape[3]
    if Hp < kh or Wp < kw:
        raise ValueError(f"conv2d: kernel {kh}x{kw} too large for padded input {Hp}x{Wp}")
    cols, Ho, Wo = _im2col(xp, kh, kw, stride)
    wmat = w.data.reshape(Cout, Cin * kh * kw)
    out = (cols @ wmat.T).reshape(B, Ho, Wo, Cout).transpose(0, 3, 1, 2)
    if b is not None:
        out = out + b.data.reshape(1, Cout, 1, 1)

    parents = (x, w) if b is None else (x, w, b)

    def vjp(g):
        gx = gw = gb = None
        gmat = g.transpose(0, 2, 3, 1).reshape(B * Ho * Wo, Cout)
        if w.requires_grad:
            gw = (gmat.T @ cols).reshape(Cout, Cin, kh, kw)
        if x.requires_grad:
            # input gradient = full correlation of the (dilated) output
            # gradient with the channel-swapped, spatially flipped kernel
            Hd = (Ho - 1) * stride + 1
            Wd = (Wo - 1) * stride + 1
            if stride > 1:
                gd = np.zeros((B, Cout, Hd, Wd), dtype=g.dtype)
                gd[:, :, ::stride, ::stride] = g
            else:
                gd = g
            gp = np.pad(gd, ((0, 0), (0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1)))
            wt = w.data.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1]
            gcols, Hf, Wf = _im2col(gp, kh, kw, 1)
            wtmat = np.ascontiguousarray(wt.reshape(Cin, Cout * kh * kw))
            full = (gcols @ wtmat.T).reshape(B, Hf, Wf, Cin).transpose(0, 3, 1, 2)
            gxp = np.zeros_like(xp)
            gxp[:, :, :Hf, :Wf] = full          # Hf < Hp only for dropped tail rows
            gx = gxp[:, :, pad:pad + H, pad:pad + W] if pad else gxp
        if b is not None and b.requires_grad:
            gb = g.sum(axis=(0, 2, 3))
        return (gx, gw) if b is None else (gx, gw, gb)

    return _result(out, parents, vjp, _need(*parents))


# ---------------------------------------------------------------------------
# pixel rearrangement and pooling

def _as_4d(data: np.ndarray, op: str):
    if data.ndim == 3:
        return data[None], True
    if data.ndim == 4:
        return data, False
    raise ValueError(f"{op}: expects (C,H,W) or (B,C,H,W), got {data.shape}")


def _shuffle_fwd(d: np.ndarray, r: int) -> np.ndarray:
    B, C, H, W = d.shape
    c = C // (r * r)
    return (d.reshape(B, c, r, r, H, W)
             .transpose(0, 1, 4, 2, 5, 3)
             .reshape(B, c, H * r, W * r))


def _unshuffle_fwd(d: np.ndarray, r: int) -> np.ndarray:
    B, C, H, W = d.shape
    return (d.reshape(B, C, H // r, r, W // r, r)
             .transpose(0, 1, 3, 5, 2, 4)
             .reshape(B, C * r * r, H // r, W // r))


def pixel_shuffle(a: Tensor, r: int) -> Tensor:
    d, squeezed = _as_4d(a.data, "pixel_shuffle")
    if d.shape[1] % (r * r):
        raise ValueError(f"pixel_shuffle: channels {d.shape[1]} not divisible by {r * r}")
    out = _shuffle_fwd(d, r)
    if squeezed:
        out = out[0]

    def vjp(g):
        g4 = g[None] if squeezed else g
        back = _unshuffle_fwd(g4, r)
        return (back[0] if squeezed else back,)

    return _result(out, (a,), vjp, _need(a))


def pixel_unshuffle(a: Tensor, r: int) -> Tensor:
    d, squeezed = _as_4d(a.data, "pixel_unshuffle")
    if d.shape[2] % r or d.shape[3] % r:
        raise ValueError(f"pixel_unshuffle: spatial dims {d.shape[2:]} not divisible by {r}")
    out = _unshuffle_fwd(d, r)
    if squeezed:
        out = out[0]

    def vjp(g):
        g4 = g[None] if squeezed else g
        back = _shuffle_fwd(g4, r)
        return (back[0] if squeezed else back,)

    return _result(out, (a,), vjp, _need(a))


def max_pool2x2(a: Tensor) -> Tensor:
    d, squeezed = _as_4d(a.data, "max_pool2x2")
    B, C, H, W = d.shape
    if H % 2 or W % 2:
        raise ValueError(f"max_pool2x2: spatial dims {(H, W)} must be even")
    H2, W2 = H // 2, W // 2
    tiles = d.reshape(B, C, H2, 2, W2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(B, C, H2, W2, 4)
    idx = tiles.argmax(axis=-1)
    out = np.take_along_axis(tiles, idx[..., None], axis=-1)[..., 0]
    if squeezed:
        out = out[0]

    def vjp(g):
        g4 = g[None] if squeezed else g
        scatter = np.zeros((B, C, H2, W2, 4), dtype=g4.dtype)
        np.put_along_axis(scatter, idx[..., None], g4[..., None], axis=-1)
        back = (scatter.reshape(B, C, H2, W2, 2, 2)
                       .transpose(0, 1, 2, 4, 3, 5)
                       .reshape(B, C, H, W))
        return (back[0] if squeezed else back,)

    return _result(out, (a,), vjp, _need(a))


# ---------------------------------------------------------------------------
# probability mass of a unit interval under a zero-mean Laplace density

def laplace_interval_mass(v: Tensor, log_b: Tensor) -> Tensor:
    """P(v - 1/2 <= X <= v + 1/2) for X ~ Laplace(0, b), b = e^{log_b}.

    Differentiable in both the evaluation points and the log-scales; the
    two arguments must have identical shapes (expand scales explicitly).
    """
    _same_shape(v, log_b, "laplace_interval_mass")
    b = np.exp(log_b.data)
    a = np.abs(v.data)
    hi = a + 0.5
    lo = a - 0.5
    e_hi = np.exp(-hi / b)                    # hi >= 0.5 > 0 always
    inner = lo < 0.0
    e_lo = np.exp(-np.abs(lo) / b)
    # mass = F(hi) - F(lo) with the standard Laplace CDF
    mass = np.where(inner, 1.0 - 0.5 * (e_hi + e_lo), 0.5 * (e_lo - e_hi))

    def vjp(g):
        gv = glog = None
        pdf_hi = e_hi / (2.0 * b)
        pdf_lo = e_lo / (2.0 * b)
        if v.requires_grad:
            # d mass / d|v| = pdf(hi) - pdf(lo); chain through |v|
            gv = g * np.sign(v.data) * (pdf_hi - pdf_lo)
        if log_b.requires_grad:
            # dF/db at x>0 is -e^{-x/b} x / (2 b^2); at x<0 it is the mirror
            d_hi = -e_hi * hi / (2.0 * b * b)
            d_lo = np.where(inner, e_lo * np.abs(lo) / (2.0 * b * b),
                            -e_lo * lo / (2.0 * b * b))
            glog = g * (d_hi - d_lo) * b
        return (gv, glog)

    return _result(mass, (v, log_b), vjp, _need(v, log_b))
