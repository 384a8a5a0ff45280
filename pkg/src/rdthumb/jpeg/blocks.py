"""8x8 block grids of DCT coefficients, the exchange format between the
codec, the rate model, the table predictor, and the upscaling decoder."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..planar import ColorSpace, PlanarImage, ValueRange
from .color import rgb_to_ycbcr
from .dct import fdct8x8, idct8x8

__all__ = ["CoeffKind", "DctBlockGrid", "split_blocks", "merge_blocks",
           "image_to_raw_grid", "grid_to_ycbcr_planes", "LEVEL_SHIFT"]

LEVEL_SHIFT = 128.0


class CoeffKind(Enum):
    RAW = "raw"                       # C: float DCT of the level-shifted image
    NOISY = "noisy-quantized"         # C~: training-time relaxed quantization
    QUANTIZED = "integer-quantized"   # [C~]: integers that enter the bitstream
    DEQUANTIZED = "dequantized"       # C^: [C~] * [Q], decoder side


@dataclass
class DctBlockGrid:
    """Per-channel stacks of N 8x8 coefficient blocks in raster order.

    All three channels share the same block count (4:4:4, no chroma
    subsampling); ``block_rows`` x ``block_cols`` gives the spatial block
    layout needed to reassemble the image.
    """

    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray
    block_rows: int
    block_cols: int
    kind: CoeffKind = CoeffKind.RAW

    def __post_init__(self):
        n = self.block_rows * self.block_cols
        for name, ch in (("y", self.y), ("cb", self.cb), ("cr", self.cr)):
            ch = np.asarray(ch)
            if ch.shape != (n, 8, 8):
                raise ValueError(f"channel {name}: expected shape {(n, 8, 8)}, got {ch.shape}")
        if self.kind is CoeffKind.QUANTIZED:
            for ch in (self.y, self.cb, self.cr):
                if np.any(ch != np.round(ch)):
                    raise ValueError("integer-quantized grid has fractional entries")
                if ch.size and (ch.min() < -2048 or ch.max() > 2047):
                    raise ValueError("integer-quantized entries outside [-2048, 2047]")

    @property
    def n_blocks(self) -> int:
        return self.block_rows * self.block_cols

    def channels(self) -> tuple:
        return (self.y, self.cb, self.cr)

    def with_channels(self, y, cb, cr, kind: CoeffKind) -> "DctBlockGrid":
        return DctBlockGrid(y, cb, cr, self.block_rows, self.block_cols, kind)


def split_blocks(plane: np.ndarray) -> np.ndarray:
    """(H,W) -> (N,8,8) in raster order; H and W must be multiples of 8."""
    h, w = plane.shape
    if h % 8 or w % 8:
        raise ValueError(f"plane dims {(h, w)} must be multiples of 8 (pad first)")
    return (plane.reshape(h // 8, 8, w // 8, 8)
                 .transpose(0, 2, 1, 3)
                 .reshape(-1, 8, 8))


def merge_blocks(blocks: np.ndarray, block_rows: int, block_cols: int) -> np.ndarray:
    """(N,8,8) raster order -> (H,W)."""
    return (blocks.reshape(block_rows, block_cols, 8, 8)
                  .transpose(0, 2, 1, 3)
                  .reshape(block_rows * 8, block_cols * 8))


def image_to_raw_grid(img: PlanarImage) -> DctBlockGrid:
    """RGB or YCbCr image -> raw DCT coefficient grid (level shift applied)."""
    if img.space is ColorSpace.RGB:
        img = rgb_to_ycbcr(img)
    img = img.to_byte_range()
    h, w = img.height, img.width
    if h % 8 or w % 8:
        raise ValueError(f"image dims {(h, w)} must be multiples of 8 (pad first)")
    chans = [fdct8x8(split_blocks(img.samples[c] - LEVEL_SHIFT)) for c in range(3)]
    return DctBlockGrid(chans[0], chans[1], chans[2], h // 8, w // 8, CoeffKind.RAW)


def grid_to_ycbcr_planes(grid: DctBlockGrid) -> np.ndarray:
    """Dequantized grid -> (3,H,W) YCbCr byte-range samples (unclamped)."""
    if grid.kind not in (CoeffKind.DEQUANTIZED, CoeffKind.RAW):
        raise ValueError(f"cannot reconstruct pixels from a {grid.kind.value} grid")
    planes = [merge_blocks(idct8x8(ch), grid.block_rows, grid.block_cols) + LEVEL_SHIFT
              for ch in grid.channels()]
    return np.stack(planes)
