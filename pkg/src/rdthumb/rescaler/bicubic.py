"""Separable Catmull-Rom bicubic resampling.

Downsampling scales the kernel width by the factor (anti-aliased), the
standard imresize convention; edges replicate.  The downsampler is the
reference producer of guidance thumbnails; the fixed-kernel upsampler is
expressed as a conv + pixel-shuffle so it can sit inside the autodiff
graph as the decoder's global skip path.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .. import autodiff as ad
from ..planar import PlanarImage

__all__ = ["cubic_weight", "bicubic_downsample", "bicubic_upsample_weights",
           "bicubic_upsample_graph"]

_A = -0.5


def cubic_weight(t: np.ndarray) -> np.ndarray:
    """Catmull-Rom kernel (a = -0.5), support |t| < 2."""
    t = np.abs(t)
    w = np.zeros_like(t)
    near = t <= 1.0
    far = (t > 1.0) & (t < 2.0)
    w[near] = (_A + 2.0) * t[near] ** 3 - (_A + 3.0) * t[near] ** 2 + 1.0
    w[far] = _A * t[far] ** 3 - 5.0 * _A * t[far] ** 2 + 8.0 * _A * t[far] - 4.0 * _A
    return w


@lru_cache(maxsize=16)
def _downsample_matrix(n_in: int, s: int) -> np.ndarray:
    """(n_out, n_in) row-stochastic resampling matrix along one axis."""
    n_out = n_in // s
    mat = np.zeros((n_out, n_in))
    for i in range(n_out):
        center = (i + 0.5) * s - 0.5
        lo = int(np.ceil(center - 2 * s))
        hi = int(np.floor(center + 2 * s))
        taps = np.arange(lo, hi + 1)
        w = cubic_weight((taps - center) / s)
        taps = np.clip(taps, 0, n_in - 1)        # edge replication
        for j, wj in zip(taps, w):
            mat[i, j] += wj
    mat /= mat.sum(axis=1, keepdims=True)
    return mat


def bicubic_downsample(img: PlanarImage, s: int) -> PlanarImage:
    """Anti-aliased bicubic downsample by an integer factor."""
    if s < 1:
        raise ValueError(f"scale factor must be >= 1, got {s}")
    if s == 1:
        return PlanarImage(img.samples.copy(), img.space, img.vrange)
    if img.height % s or img.width % s:
        raise ValueError(f"dims {(img.height, img.width)} not divisible by {s}")
    rows = _downsample_matrix(img.height, s)
    cols = _downsample_matrix(img.width, s)
    out = np.einsum("oi,cij,pj->cop", rows, img.samples, cols, optimize=True)
    return PlanarImage(out, img.space, img.vrange)


@lru_cache(maxsize=8)
def bicubic_upsample_weights(s: int, channels: int = 3) -> np.ndarray:
    """Fixed conv weights for x``s`` bicubic upsampling via pixel shuffle.

    Returns (channels*s*s, channels, 5, 5); apply to a replicate-padded
    input (pad 2) and pixel-shuffle by ``s``.
    """
    w = np.zeros((channels * s * s, channels, 5, 5))
    for p in range(s):
        phase = (p + 0.5) / s - 0.5
        taps = cubic_weight(phase - np.arange(-2, 3))
        for q in range(s):
            phase_x = (q + 0.5) / s - 0.5
            taps_x = cubic_weight(phase_x - np.arange(-2, 3))
            for c in range(channels):
                w[(c * s + p) * s + q, c] = np.outer(taps, taps_x)
    return w


def bicubic_upsample_graph(t: ad.Tensor, s: int) -> ad.Tensor:
    """Differentiable fixed-kernel bicubic upsample of (B,C,H,W) by ``s``.

    Replicate padding is built from edge slices so the border gradient
    folds back onto the border pixels.
    """
    c = t.shape[1]
    padded = _pad_replicate_graph(t)
    weights = ad.Tensor(bicubic_upsample_weights(s, c))
    return ad.pixel_shuffle(ad.conv2d(padded, weights), s)


def _pad_replicate_graph(t: ad.Tensor) -> ad.Tensor:
    """Replicate-pad (B,C,H,W) by 2 on each spatial side inside the graph."""
    top = ad.narrow(t, 2, 0, 1)
    bot = ad.narrow(t, 2, t.shape[2] - 1, 1)
    t = ad.concat([top, top, t, bot, bot], axis=2)
    left = ad.narrow(t, 3, 0, 1)
    right = ad.narrow(t, 3, t.shape[3] - 1, 1)
    return ad.concat([left, left, t, right, right], axis=3)
