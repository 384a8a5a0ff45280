"""Full-range BT.601 color transforms (the JFIF convention)."""

from __future__ import annotations

import numpy as np

from ..planar import ColorSpace, PlanarImage, ValueRange

__all__ = ["RGB_TO_YCBCR", "YCBCR_TO_RGB", "rgb_to_ycbcr", "ycbcr_to_rgb",
           "rgb_to_ycbcr_array", "ycbcr_to_rgb_array"]

_KR, _KB = 0.299, 0.114
_KG = 1.0 - _KR - _KB

RGB_TO_YCBCR = np.array([
    [_KR, _KG, _KB],
    [-0.5 * _KR / (1.0 - _KB), -0.5 * _KG / (1.0 - _KB), 0.5],
    [0.5, -0.5 * _KG / (1.0 - _KR), -0.5 * _KB / (1.0 - _KR)],
])

# Exact numerical inverse so the continuous round trip is identity.
YCBCR_TO_RGB = np.linalg.inv(RGB_TO_YCBCR)


def _chroma_offset(vrange: ValueRange) -> float:
    return 128.0 if vrange is ValueRange.BYTE else 0.5


def rgb_to_ycbcr_array(rgb: np.ndarray, vrange: ValueRange = ValueRange.BYTE) -> np.ndarray:
    """(3,H,W) RGB -> YCbCr without any clamping."""
    out = np.einsum("ij,jhw->ihw", RGB_TO_YCBCR, rgb)
    out[1] += _chroma_offset(vrange)
    out[2] += _chroma_offset(vrange)
    return out


def ycbcr_to_rgb_array(ycc: np.ndarray, vrange: ValueRange = ValueRange.BYTE) -> np.ndarray:
    """(3,H,W) YCbCr -> RGB without any clamping."""
    shifted = ycc.copy()
    shifted[1] -= _chroma_offset(vrange)
    shifted[2] -= _chroma_offset(vrange)
    return np.einsum("ij,jhw->ihw", YCBCR_TO_RGB, shifted)


def rgb_to_ycbcr(img: PlanarImage) -> PlanarImage:
    if img.space is not ColorSpace.RGB:
        raise ValueError(f"rgb_to_ycbcr expects an RGB image, got {img.space}")
    return PlanarImage(rgb_to_ycbcr_array(img.samples, img.vrange),
                       ColorSpace.YCBCR, img.vrange)


def ycbcr_to_rgb(img: PlanarImage, clamp: bool = False) -> PlanarImage:
    """Inverse transform; ``clamp`` saturates out-of-gamut values to the
    declared range instead of letting them escape it."""
    if img.space is not ColorSpace.YCBCR:
        raise ValueError(f"ycbcr_to_rgb expects a YCbCr image, got {img.space}")
    rgb = ycbcr_to_rgb_array(img.samples, img.vrange)
    if clamp:
        top = 255.0 if img.vrange is ValueRange.BYTE else 1.0
        rgb = np.clip(rgb, 0.0, top)
    return PlanarImage(rgb, ColorSpace.RGB, img.vrange)
