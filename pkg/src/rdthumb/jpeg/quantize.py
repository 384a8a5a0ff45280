"""Coefficient quantization: the hard bitstream path and the
noise-relaxed differentiable path used during training."""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from .blocks import CoeffKind, DctBlockGrid
from .tables import QuantTableSet, TableForm, round_half_away

__all__ = ["AC_LIMIT", "DC_LIMIT", "quantize_hard", "dequantize",
           "quantize_soft", "dequantize_soft", "quantize_soft_grid"]

# Largest magnitudes the baseline Huffman categories can represent:
# AC amplitudes use categories 1..10, DC differences use 0..11.
AC_LIMIT = 1023
DC_LIMIT = 2047


def _clamp_quantized(q: np.ndarray) -> np.ndarray:
    out = np.clip(q, -AC_LIMIT, AC_LIMIT)
    out[:, 0, 0] = np.clip(q[:, 0, 0], -DC_LIMIT, DC_LIMIT)
    return out


def quantize_hard(grid: DctBlockGrid, q: QuantTableSet) -> DctBlockGrid:
    """Divide by the integer tables, round half away from zero, and clamp
    to the Huffman-representable range."""
    if q.form is not TableForm.INTEGER:
        raise ValueError("quantize_hard requires integer-form tables")
    if grid.kind is not CoeffKind.RAW:
        raise ValueError(f"quantize_hard expects a raw grid, got {grid.kind.value}")
    y = _clamp_quantized(round_half_away(grid.y / q.q_luma))
    cb = _clamp_quantized(round_half_away(grid.cb / q.q_chroma))
    cr = _clamp_quantized(round_half_away(grid.cr / q.q_chroma))
    return grid.with_channels(y, cb, cr, CoeffKind.QUANTIZED)


def dequantize(grid: DctBlockGrid, q: QuantTableSet) -> DctBlockGrid:
    """Entrywise product with the tables; recovers C^ for the decoder."""
    if q.form is not TableForm.INTEGER:
        raise ValueError("dequantize requires integer-form tables")
    if grid.kind is not CoeffKind.QUANTIZED:
        raise ValueError(f"dequantize expects an integer-quantized grid, got {grid.kind.value}")
    return grid.with_channels(grid.y * q.q_luma, grid.cb * q.q_chroma,
                              grid.cr * q.q_chroma, CoeffKind.DEQUANTIZED)


def quantize_soft(coeffs: ad.Tensor, q_div: ad.Tensor,
                  coeff_noise: np.ndarray | None) -> ad.Tensor:
    """Training-time relaxation of quantization: C / (Q + eps) + eps.

    ``q_div`` is the table already expanded to the coefficient shape with
    its own uniform noise added (the divisor); ``coeff_noise`` is the
    additive noise applied after division, or None to pin it to zero.
    Fully differentiable, no rounding.
    """
    out = ad.mul(coeffs, ad.reciprocal(q_div))
    if coeff_noise is not None:
        out = ad.add(out, ad.Tensor(coeff_noise))
    return out


def dequantize_soft(noisy: ad.Tensor, q_div: ad.Tensor) -> ad.Tensor:
    """Training-time mirror of dequantization: multiply back by the same
    noisy divisor, so the coefficient error is uniform on +-Q/2."""
    return ad.mul(noisy, q_div)


def quantize_soft_grid(grid: DctBlockGrid, q: QuantTableSet,
                       rng: np.random.Generator | None) -> DctBlockGrid:
    """Numpy convenience form of the relaxation for grid-level callers.

    Draws one uniform noise per table entry (shared across blocks, as a
    table is one value per frequency) and one per coefficient.
    """
    if q.form is not TableForm.CONTINUOUS:
        raise ValueError("quantize_soft requires continuous-form tables")
    if grid.kind is not CoeffKind.RAW:
        raise ValueError(f"quantize_soft expects a raw grid, got {grid.kind.value}")

    def one(ch: np.ndarray, table: np.ndarray) -> np.ndarray:
        if rng is None:
            return ch / table
        denom = table + rng.uniform(-0.5, 0.5, size=(8, 8))
        return ch / denom + rng.uniform(-0.5, 0.5, size=ch.shape)

    return grid.with_channels(one(grid.y, q.q_luma), one(grid.cb, q.q_chroma),
                              one(grid.cr, q.q_chroma), CoeffKind.NOISY)
