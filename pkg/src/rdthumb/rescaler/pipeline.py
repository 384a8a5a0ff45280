"""The end-to-end differentiable rescaling pipeline and its losses.

Training runs the whole chain in one graph: encoder -> color transform ->
block DCT -> predicted tables -> noise-relaxed quantization -> rate
estimate -> soft dequantization -> inverse DCT -> frequency features ->
decoder -> losses.  At test time the middle is replaced by the real
codec; the surrounding pieces are shared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..graphops import (block_dct_graph, block_idct_graph, rgb_to_ycc_graph,
                        ycc_to_rgb_graph)
from ..jpeg.blocks import DctBlockGrid
from ..jpeg.quantize import dequantize_soft, quantize_soft
from ..qpm import COEFF_SCALE, QpmNetwork, predict_tables_graph
from ..rate import FactorizedRateModel, channel_bits
from .nets import FREQ_CHANNELS, DecoderNet, EncoderNet, FreqExtractor

__all__ = ["TrainConfig", "encode_lr", "extract_freq_features", "decode_hr",
           "recon_loss", "guide_loss", "total_loss", "simulate_jpeg_soft",
           "coeff_tensor_from_grid", "SoftJpegResult"]


@dataclass
class TrainConfig:
    scale: int = 4
    lambda1: float = 0.6
    lambda2: float = 0.01
    patch: int = 64
    batch: int = 8
    iterations: int = 2000
    lr: float = 2e-4
    lr_decay_every: int = 500
    lr_decay: float = 0.75
    seed: int = 0
    encoder_base: int = 16
    extractor_blocks: int = 4
    decoder_blocks: int = 4
    decoder_variant: str = "efficient"
    qpm_hidden: int = 128
    use_freq: bool = True          # False trains the no-extractor ablation

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("loss weights must be non-negative")
        if self.patch % (8 * self.scale):
            raise ValueError(f"patch {self.patch} must be divisible by "
                             f"{8 * self.scale}")


def encode_lr(x: ad.Tensor, encoder: EncoderNet) -> ad.Tensor:
    """HR tensor in [0,1] -> LR thumbnail in [0,1] (pass-through clamp)."""
    return ad.clamp_passthrough(encoder(x), 0.0, 1.0)


@dataclass
class SoftJpegResult:
    """Intermediate tensors of the relaxed JPEG simulation for one batch."""

    y_hat: ad.Tensor                       # decoded thumbnail, [0,1]
    noisy: list          # per channel: (B,64,hb,wb) noisy-quantized C~
    dequant: list        # per channel: (B,64,hb,wb) soft-dequantized C^
    tables: list         # per image: (q_luma Tensor(64), q_chroma Tensor(64))
    bits: ad.Tensor                        # total estimated bits over batch


def simulate_jpeg_soft(y: ad.Tensor, qpm: QpmNetwork | None,
                       rate_model: FactorizedRateModel,
                       noise_rng: np.random.Generator | None,
                       fixed_tables: tuple | None = None) -> SoftJpegResult:
    """Differentiable JPEG round trip of a batch of thumbnails in [0,1].

    Tables come from the QPM (per image) unless ``fixed_tables`` provides
    (q_luma, q_chroma) arrays used for every image.  ``noise_rng`` draws
    the relaxation noise; pass None to pin all noise to zero.
    """
    b, _, h, w = y.shape
    if h % 8 or w % 8:
        raise ValueError(f"thumbnail dims {(h, w)} must be multiples of 8")
    rows, cols = h // 8, w // 8

    ycc = rgb_to_ycc_graph(ad.mul_scalar(y, 255.0))
    coeff = [block_dct_graph(ad.narrow(ycc, 1, c, 1)) for c in range(3)]

    tables = []
    for i in range(b):
        if fixed_tables is not None:
            ql = ad.Tensor(np.asarray(fixed_tables[0], dtype=np.float64).reshape(64))
            qc = ad.Tensor(np.asarray(fixed_tables[1], dtype=np.float64).reshape(64))
        else:
            luma_vecs, chroma_vecs = _qpm_inputs(coeff, i, rows, cols)
            ql, qc = predict_tables_graph(luma_vecs, chroma_vecs, qpm)
        tables.append((ql, qc))

    noisy = []
    dequant = []
    bits = None
    for c in range(3):
        tab_idx = 0 if c == 0 else 1
        log_scales = (rate_model.log_scale_luma if c == 0
                      else rate_model.log_scale_chroma)
        per_image_noisy = []
        per_image_deq = []
        for i in range(b):
            table = tables[i][tab_idx]
            tshape = ad.reshape(table, (1, 64, 1, 1))
            if noise_rng is None:
                denom = ad.expand(tshape, (1, 64, rows, cols))
                c_noise = None
            else:
                q_noise = ad.Tensor(noise_rng.uniform(-0.5, 0.5, size=(1, 64, 1, 1)))
                denom = ad.expand(ad.add(tshape, q_noise), (1, 64, rows, cols))
                c_noise = noise_rng.uniform(-0.5, 0.5, size=(1, 64, rows, cols))
            ci = ad.narrow(coeff[c], 0, i, 1)
            c_tilde = quantize_soft(ci, denom, c_noise)
            per_image_noisy.append(c_tilde)
            per_image_deq.append(dequantize_soft(c_tilde, denom))
        noisy_c = ad.concat(per_image_noisy, axis=0) if b > 1 else per_image_noisy[0]
        deq_c = ad.concat(per_image_deq, axis=0) if b > 1 else per_image_deq[0]
        noisy.append(noisy_c)
        dequant.append(deq_c)
        term = channel_bits(noisy_c, log_scales)
        bits = term if bits is None else ad.add(bits, term)

    shifted = ad.concat([block_idct_graph(dq) for dq in dequant], axis=1)
    rgb = ycc_to_rgb_graph(shifted)
    y_hat = ad.clamp_passthrough(ad.mul_scalar(rgb, 1.0 / 255.0), 0.0, 1.0)
    return SoftJpegResult(y_hat, noisy, dequant, tables, bits)


def _qpm_inputs(coeff: list, i: int, rows: int, cols: int):
    """Standardized per-block vectors for image i of the batch."""
    n = rows * cols
    inv = ad.Tensor((1.0 / COEFF_SCALE).reshape(1, 64))

    def vecs(c):
        one = ad.narrow(coeff[c], 0, i, 1)                # (1,64,rows,cols)
        flat = ad.reshape(ad.permute(one, (0, 2, 3, 1)), (n, 64))
        return ad.mul(flat, ad.expand(inv, (n, 64)))

    luma = vecs(0)
    chroma = ad.concat([vecs(1), vecs(2)], axis=1)
    return luma, chroma


def coeff_tensor_from_grid(grid: DctBlockGrid) -> ad.Tensor:
    """Dequantized grid -> standardized (1,192,hb,wb) extractor input.

    Each coefficient channel is divided by its fixed scale (DC by 1024,
    AC by 128) so activations stay O(1).
    """
    from ..rate import reshape_for_rate

    layout = reshape_for_rate(grid)                        # (3,64,hb,wb)
    scale = np.tile(COEFF_SCALE, 3).reshape(FREQ_CHANNELS, 1, 1)
    data = layout.reshape(FREQ_CHANNELS, *layout.shape[2:]) / scale
    return ad.Tensor(data[None])


def _standardize_dequant(dequant: list) -> ad.Tensor:
    """Soft-dequantized channel tensors -> (B,192,hb,wb) extractor input."""
    cat = ad.concat(dequant, axis=1)
    scale = np.tile(COEFF_SCALE, 3).reshape(1, FREQ_CHANNELS, 1, 1)
    inv = ad.Tensor(1.0 / scale)
    return ad.mul(cat, ad.expand(inv, cat.shape))


def extract_freq_features(c_hat: ad.Tensor, extractor: FreqExtractor) -> ad.Tensor:
    """Standardized coefficient tensor (B,192,hb,wb) -> (B,24,8hb,8wb)."""
    return extractor(c_hat)


def decode_hr(y_hat: ad.Tensor, c_hat: ad.Tensor, extractor: FreqExtractor,
              decoder: DecoderNet, use_freq: bool = True) -> ad.Tensor:
    """Reconstruct HR from thumbnail pixels and coefficient planes.

    ``use_freq=False`` zeroes the frequency features (ablation switch).
    """
    feats = extract_freq_features(c_hat, extractor)
    if not use_freq:
        feats = ad.mul_scalar(ad.stop_gradient(feats), 0.0)
    return ad.clamp_passthrough(decoder(y_hat, feats), 0.0, 1.0)


# ---------------------------------------------------------------------------
# losses

def recon_loss(x_hat: ad.Tensor, x: ad.Tensor) -> ad.Tensor:
    """L1 over all entries divided by H*W (not by the channel count)."""
    if x_hat.shape != x.shape:
        raise ValueError(f"shape mismatch {x_hat.shape} vs {x.shape}")
    h, w = x.shape[-2], x.shape[-1]
    batch = x.shape[0] if len(x.shape) == 4 else 1
    total = ad.sum_(ad.absolute(ad.sub(x_hat, x)))
    return ad.mul_scalar(total, 1.0 / (h * w * batch))


def guide_loss(y_hat: ad.Tensor, y_ref: ad.Tensor) -> ad.Tensor:
    """Squared L2 over all entries divided by the LR pixel count."""
    if y_hat.shape != y_ref.shape:
        raise ValueError(f"shape mismatch {y_hat.shape} vs {y_ref.shape}")
    h, w = y_ref.shape[-2], y_ref.shape[-1]
    batch = y_ref.shape[0] if len(y_ref.shape) == 4 else 1
    total = ad.sum_(ad.square(ad.sub(y_hat, y_ref)))
    return ad.mul_scalar(total, 1.0 / (h * w * batch))


def total_loss(l_recon: ad.Tensor, l_guide: ad.Tensor, l_bpp: ad.Tensor,
               cfg: TrainConfig) -> ad.Tensor:
    """recon + lambda1 * guide + lambda2 * bpp."""
    return ad.add(l_recon, ad.add(ad.mul_scalar(l_guide, cfg.lambda1),
                                  ad.mul_scalar(l_bpp, cfg.lambda2)))
