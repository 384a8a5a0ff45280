"""Differentiable bitrate estimation with per-frequency factorized models.

Each of the 64 luma frequency channels gets its own zero-mean discretized
Laplacian with a learnable log-scale; the 64 chroma channels are shared
by Cb and Cr.  The probability of a (noisy) coefficient is the density
mass over a unit interval around it, matching the additive-noise
relaxation of quantization, and the estimated rate is the sum of
-log2 probabilities.  Ground truth comes from real file sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .jpeg.blocks import CoeffKind, DctBlockGrid
from .jpeg.codec import JpegBytes

__all__ = ["PROB_FLOOR_LOG2", "FactorizedRateModel", "RateEstimate",
           "reshape_for_rate", "grid_from_rate_layout", "channel_bits",
           "estimate_rate", "bpp_loss", "fit_aux", "measured_bpp"]

# Probabilities are floored at 2^-50 so outliers cost at most 50 bits.
PROB_FLOOR_LOG2 = -50
_PROB_FLOOR = 2.0 ** PROB_FLOOR_LOG2


@dataclass
class RateEstimate:
    """Total estimated bits plus the per-frequency-channel breakdown."""

    total_bits: ad.Tensor                 # scalar, differentiable
    per_channel_bits: np.ndarray          # (128,): 64 luma then 64 chroma

    @property
    def total(self) -> float:
        return float(self.total_bits.data)


class FactorizedRateModel:
    """Learnable log-scales for 64 luma + 64 shared chroma channels."""

    def __init__(self, init_scale: float = 5.0, dtype=np.float64):
        log0 = float(np.log(init_scale))
        self.log_scale_luma = ad.parameter(np.full(64, log0), dtype)
        self.log_scale_chroma = ad.parameter(np.full(64, log0), dtype)

    def params(self):
        return [("log_scale_luma", self.log_scale_luma),
                ("log_scale_chroma", self.log_scale_chroma)]

    def scales(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.exp(self.log_scale_luma.data), np.exp(self.log_scale_chroma.data))

    def copy(self) -> "FactorizedRateModel":
        clone = FactorizedRateModel()
        clone.log_scale_luma.data = self.log_scale_luma.data.copy()
        clone.log_scale_chroma.data = self.log_scale_chroma.data.copy()
        return clone


def reshape_for_rate(grid: DctBlockGrid) -> np.ndarray:
    """Grid -> (3, 64, block_rows, block_cols).

    Channel k of the 64 is the frequency at natural (row-major) position
    (k // 8, k % 8) of the 8x8 block; spatial layout follows the block
    raster.
    """
    out = np.empty((3, 64, grid.block_rows, grid.block_cols))
    for c, ch in enumerate(grid.channels()):
        out[c] = (ch.reshape(grid.block_rows, grid.block_cols, 64)
                    .transpose(2, 0, 1))
    return out


def grid_from_rate_layout(arr: np.ndarray, kind: CoeffKind) -> DctBlockGrid:
    """Inverse of :func:`reshape_for_rate`."""
    _, _, rows, cols = arr.shape
    chans = [arr[c].transpose(1, 2, 0).reshape(rows * cols, 8, 8) for c in range(3)]
    return DctBlockGrid(chans[0], chans[1], chans[2], rows, cols, kind)


def channel_bits(values: ad.Tensor, log_scales: ad.Tensor) -> ad.Tensor:
    """-log2 probability summed over a (..., 64, h, w) coefficient tensor.

    ``log_scales`` is the per-channel (64,) parameter tensor; it is
    expanded across the batch and spatial axes here.
    """
    shape = values.shape
    if len(shape) < 3 or shape[-3] != 64:
        raise ValueError(f"expected (...,64,h,w) coefficients, got {shape}")
    expanded = ad.expand(ad.reshape(log_scales, (64, 1, 1)), shape)
    mass = ad.laplace_interval_mass(values, expanded)
    mass = ad.clamp_min(mass, _PROB_FLOOR)
    return ad.mul_scalar(ad.sum_(ad.log2(mass)), -1.0)


def estimate_rate(coeffs, model: FactorizedRateModel) -> RateEstimate:
    """Estimated bits for a (3, 64, h, w) noisy-quantized coefficient array.

    Differentiable with respect to both the coefficients (pass a Tensor)
    and the model's log-scales.
    """
    t = coeffs if isinstance(coeffs, ad.Tensor) else ad.Tensor(np.asarray(coeffs, dtype=np.float64))
    if len(t.shape) != 4 or t.shape[0] != 3 or t.shape[1] != 64:
        raise ValueError(f"expected (3,64,h,w) coefficients, got {t.shape}")
    y = ad.narrow(t, 0, 0, 1)
    cb = ad.narrow(t, 0, 1, 1)
    cr = ad.narrow(t, 0, 2, 1)
    bits_y = channel_bits(y, model.log_scale_luma)
    bits_cb = channel_bits(cb, model.log_scale_chroma)
    bits_cr = channel_bits(cr, model.log_scale_chroma)
    total = ad.add(bits_y, ad.add(bits_cb, bits_cr))

    per = np.empty(128)
    data = t.data
    sl, sc = model.scales()
    per[:64] = _bits_per_channel(data[0], sl)
    per[64:] = _bits_per_channel(data[1], sc) + _bits_per_channel(data[2], sc)
    return RateEstimate(total, per)


def _bits_per_channel(vals: np.ndarray, scales: np.ndarray) -> np.ndarray:
    a = np.abs(vals)
    b = scales[:, None, None]
    hi = a + 0.5
    lo = a - 0.5
    mass = np.where(lo < 0,
                    1.0 - 0.5 * (np.exp(-hi / b) + np.exp(-np.abs(lo) / b)),
                    0.5 * (np.exp(-lo / b) - np.exp(-hi / b)))
    return -np.log2(np.maximum(mass, _PROB_FLOOR)).sum(axis=(1, 2))


def bpp_loss(rate: RateEstimate, height: int, width: int) -> ad.Tensor:
    """Estimated bits over the number of high-resolution pixels."""
    if height <= 0 or width <= 0:
        raise ValueError("bpp_loss needs positive high-resolution dimensions")
    return ad.mul_scalar(rate.total_bits, 1.0 / (height * width))


def measured_bpp(jpeg: JpegBytes, height: int, width: int) -> float:
    """Real file size in bits over the number of high-resolution pixels."""
    return 8.0 * len(jpeg.data) / (height * width)


def fit_aux(model: FactorizedRateModel, batches, epochs: int = 100,
            lr: float = 0.05) -> list[float]:
    """Fit the channel densities to noisy coefficient samples.

    ``batches`` is an iterable of (3, 64, h, w) arrays drawn with the
    additive-noise relaxation applied.  Minimizes the negative
    log-likelihood (total estimated bits) by Adam; returns the per-epoch
    NLL trace in bits.
    """
    stacked = [np.asarray(b, dtype=np.float64) for b in batches]
    if not stacked:
        raise ValueError("fit_aux needs at least one sample batch")
    luma = np.concatenate([b[0].reshape(64, -1) for b in stacked], axis=1)
    chroma = np.concatenate([b[c].reshape(64, -1) for b in stacked for c in (1, 2)],
                            axis=1)
    luma_t = ad.Tensor(luma.reshape(1, 64, -1, 1))
    chroma_t = ad.Tensor(chroma.reshape(1, 64, -1, 1))

    opt = ad.Adam([model.log_scale_luma, model.log_scale_chroma], lr=lr)
    trace = []
    for _ in range(epochs):
        opt.zero_grad()
        nll = ad.add(channel_bits(luma_t, model.log_scale_luma),
                     channel_bits(chroma_t, model.log_scale_chroma))
        ad.backward(nll)
        opt.step()
        trace.append(float(nll.data))
    return trace
