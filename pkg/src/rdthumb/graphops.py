"""Differentiable building blocks of the JPEG simulation graph.

The color transforms become fixed-weight 1x1 convolutions and the 8x8
block DCT becomes a pixel rearrangement plus a fixed 1x1 convolution, so
the whole codec path stays inside the autodiff graph.  All tensors here
are (B, C, H, W) in byte scale.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .jpeg.color import RGB_TO_YCBCR, YCBCR_TO_RGB
from .jpeg.dct import DCT_BASIS

__all__ = ["rgb_to_ycc_graph", "ycc_to_rgb_graph", "block_dct_graph",
           "block_idct_graph", "LEVEL_SHIFT"]

LEVEL_SHIFT = 128.0

# After the 128 level shift, chroma offsets cancel: shifted = M @ rgb
# + [-128, 0, 0] ... wait, derive: ycc = M @ rgb + [0,128,128]; shifted =
# ycc - 128 = M @ rgb - [128, 0, 0].
_FWD_W = RGB_TO_YCBCR.reshape(3, 3, 1, 1)
_FWD_B = np.array([-LEVEL_SHIFT, 0.0, 0.0])

# rgb = Minv @ [y_s + 128, cb_s, cr_s] = Minv @ shifted + 128 * Minv[:, 0]
_INV_W = YCBCR_TO_RGB.reshape(3, 3, 1, 1)
_INV_B = YCBCR_TO_RGB[:, 0] * LEVEL_SHIFT

# 1x1 conv weights mapping the 64 block-position channels produced by
# pixel_unshuffle(8) (index dy*8+dx) to the 64 frequency channels
# (index u*8+v), and back.
_DCT_W = np.einsum("uy,vx->uvyx", DCT_BASIS, DCT_BASIS).reshape(64, 64, 1, 1)
_IDCT_W = np.einsum("uy,vx->yxuv", DCT_BASIS, DCT_BASIS).reshape(64, 64, 1, 1)


def rgb_to_ycc_graph(rgb: ad.Tensor) -> ad.Tensor:
    """(B,3,H,W) RGB bytes -> level-shifted YCbCr (Y-128, Cb-128, Cr-128)."""
    return ad.conv2d(rgb, ad.Tensor(_FWD_W), ad.Tensor(_FWD_B))


def ycc_to_rgb_graph(shifted: ad.Tensor) -> ad.Tensor:
    """Level-shifted YCbCr -> (B,3,H,W) RGB bytes (unclamped)."""
    return ad.conv2d(shifted, ad.Tensor(_INV_W), ad.Tensor(_INV_B))


def block_dct_graph(plane: ad.Tensor) -> ad.Tensor:
    """(B,1,H,W) level-shifted samples -> (B,64,H/8,W/8) DCT channels.

    Channel k holds the coefficient at natural position (k//8, k%8) of
    each 8x8 block, matching the rate model's layout.
    """
    return ad.conv2d(ad.pixel_unshuffle(plane, 8), ad.Tensor(_DCT_W))


def block_idct_graph(chan: ad.Tensor) -> ad.Tensor:
    """(B,64,h,w) DCT channels -> (B,1,8h,8w) level-shifted samples."""
    return ad.pixel_shuffle(ad.conv2d(chan, ad.Tensor(_IDCT_W)), 8)
