"""Channel-major raster images with explicit color space and value range."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = ["ColorSpace", "ValueRange", "PlanarImage", "pad_to_blocks", "crop"]


class ColorSpace(Enum):
    RGB = "rgb"
    YCBCR = "ycbcr"


class ValueRange(Enum):
    UNIT = "unit"    # [0, 1]
    BYTE = "byte"    # [0, 255]


@dataclass
class PlanarImage:
    """A (channels, height, width) array of samples.

    YCbCr always means the full-range BT.601 (JFIF) convention.  Sample
    storage is float64 regardless of the declared value range.
    """

    samples: np.ndarray
    space: ColorSpace = ColorSpace.RGB
    vrange: ValueRange = ValueRange.BYTE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 3:
            raise ValueError(f"samples must be (C,H,W), got shape {self.samples.shape}")

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def height(self) -> int:
        return self.samples.shape[1]

    @property
    def width(self) -> int:
        return self.samples.shape[2]

    def to_byte_range(self) -> "PlanarImage":
        if self.vrange is ValueRange.BYTE:
            return self
        return PlanarImage(self.samples * 255.0, self.space, ValueRange.BYTE)

    def to_unit_range(self) -> "PlanarImage":
        if self.vrange is ValueRange.UNIT:
            return self
        return PlanarImage(self.samples / 255.0, self.space, ValueRange.UNIT)

    def rounded_bytes(self) -> np.ndarray:
        """uint8 view of the image (clamps, rounds half away from zero)."""
        data = self.to_byte_range().samples
        return np.clip(np.floor(data + 0.5), 0, 255).astype(np.uint8)


def pad_to_blocks(img: PlanarImage, block: int = 8) -> PlanarImage:
    """Round dimensions up to multiples of ``block`` by edge replication.

    The caller keeps the original dimensions for cropping after decode.
    """
    h, w = img.height, img.width
    ph = (-h) % block
    pw = (-w) % block
    if ph == 0 and pw == 0:
        return img
    padded = np.pad(img.samples, ((0, 0), (0, ph), (0, pw)), mode="edge")
    return PlanarImage(padded, img.space, img.vrange)


def crop(img: PlanarImage, height: int, width: int) -> PlanarImage:
    if height > img.height or width > img.width:
        raise ValueError(f"cannot crop {img.height}x{img.width} to {height}x{width}")
    return PlanarImage(img.samples[:, :height, :width].copy(), img.space, img.vrange)
