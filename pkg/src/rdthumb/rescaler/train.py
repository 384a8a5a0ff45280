"""Model bundle, training loop, test-time fine-tuning, and the hard
(real-codec) encode/decode paths used at test time."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff.nn import collect_params
from ..jpeg.blocks import image_to_raw_grid
from ..jpeg.codec import JpegBytes, jpeg_decode, jpeg_encode
from ..jpeg.tables import (QuantTableSet, TableForm, annex_k_tables,
                           integerize_tables, quality_scale)
from ..planar import ColorSpace, PlanarImage, ValueRange
from ..qpm import QpmNetwork, TableMode, predict_tables
from ..rate import FactorizedRateModel, channel_bits, measured_bpp
from .bicubic import bicubic_downsample
from .nets import DecoderNet, EncoderNet, FreqExtractor
from .pipeline import (TrainConfig, coeff_tensor_from_grid, decode_hr,
                       encode_lr, guide_loss, recon_loss, simulate_jpeg_soft,
                       total_loss, _standardize_dequant)

__all__ = ["TrainedModel", "StepReport", "init_model", "train_step",
           "train_loop", "testtime_finetune", "encode_with_model",
           "decode_with_model", "EncodeResult", "DecodeResult"]


class TrainedModel:
    """Everything trainable, addressable by name for checkpoints."""

    def __init__(self, cfg: TrainConfig, rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        self.cfg = cfg
        self.encoder = EncoderNet(cfg.scale, cfg.encoder_base, rng)
        self.qpm = QpmNetwork(cfg.qpm_hidden, rng)
        self.extractor = FreqExtractor(cfg.extractor_blocks, rng=rng)
        self.decoder = DecoderNet(cfg.scale, blocks=cfg.decoder_blocks,
                                  variant=cfg.decoder_variant, rng=rng)
        self.rate_model = FactorizedRateModel()

    def groups(self):
        return [("encoder", self.encoder), ("qpm", self.qpm),
                ("extractor", self.extractor), ("decoder", self.decoder),
                ("rate_model", self.rate_model)]

    def named_params(self) -> list:
        out = []
        for name, module in self.groups():
            out.extend(collect_params(module, prefix=name + "."))
        return out

    def arrays(self) -> dict:
        return {name: t.data.copy() for name, t in self.named_params()}

    def load_arrays(self, arrays: dict) -> None:
        for name, t in self.named_params():
            if name not in arrays:
                raise KeyError(f"checkpoint missing parameter {name!r}")
            src = np.asarray(arrays[name])
            if src.shape != t.data.shape:
                raise ValueError(f"{name}: shape {src.shape} != {t.data.shape}")
            t.data = src.astype(np.float64)


def init_model(cfg: TrainConfig) -> TrainedModel:
    return TrainedModel(cfg)


@dataclass
class StepReport:
    step: int
    total: float
    recon: float
    guide: float
    bpp: float
    aux: float


def _batch_losses(model: TrainedModel, batch: np.ndarray, cfg: TrainConfig,
                  noise_rng: np.random.Generator | None):
    """Build the full training graph for one (B,3,H,W) batch in [0,1]."""
    b, _, hh, ww = batch.shape
    x = ad.Tensor(batch)
    y = encode_lr(x, model.encoder)

    y_ref = np.stack([
        bicubic_downsample(PlanarImage(batch[i], ColorSpace.RGB, ValueRange.UNIT),
                           cfg.scale).samples
        for i in range(b)])

    sim = simulate_jpeg_soft(y, model.qpm, model.rate_model, noise_rng)
    c_hat = _standardize_dequant(sim.dequant)
    x_hat = decode_hr(sim.y_hat, c_hat, model.extractor, model.decoder,
                      use_freq=cfg.use_freq)

    l_recon = recon_loss(x_hat, x)
    l_guide = guide_loss(sim.y_hat, ad.Tensor(y_ref))
    l_bpp = ad.mul_scalar(sim.bits, 1.0 / (b * hh * ww))
    loss = total_loss(l_recon, l_guide, l_bpp, cfg)

    # Auxiliary density fit on the detached samples (pure likelihood).
    detached = [ad.stop_gradient(n) for n in sim.noisy]
    aux = ad.add(channel_bits(detached[0], model.rate_model.log_scale_luma),
                 ad.add(channel_bits(detached[1], model.rate_model.log_scale_chroma),
                        channel_bits(detached[2], model.rate_model.log_scale_chroma)))
    aux = ad.mul_scalar(aux, 1.0 / (b * hh * ww))
    return loss, l_recon, l_guide, l_bpp, aux


def train_step(model: TrainedModel, batch: np.ndarray, cfg: TrainConfig,
               noise_rng: np.random.Generator | None,
               opt_nets: ad.Adam, opt_aux: ad.Adam, step: int) -> StepReport:
    """One optimizer step over a batch; aborts cleanly on non-finite loss."""
    loss, l_recon, l_guide, l_bpp, aux = _batch_losses(model, batch, cfg, noise_rng)
    combined = ad.add(loss, aux)
    if not np.isfinite(combined.data):
        raise FloatingPointError(
            f"non-finite loss at step {step}: total={float(loss.data)} "
            f"aux={float(aux.data)}; parameters left untouched")
    opt_nets.zero_grad()
    opt_aux.zero_grad()
    ad.backward(combined)
    opt_nets.step()
    opt_aux.step()
    return StepReport(step, float(loss.data), float(l_recon.data),
                      float(l_guide.data), float(l_bpp.data), float(aux.data))


def train_loop(model: TrainedModel, patches: np.ndarray, cfg: TrainConfig,
               log_every: int = 50, on_step=None) -> list[StepReport]:
    """Train on a fixed patch set; returns the per-log-step history."""
    data_rng = np.random.default_rng(cfg.seed)
    noise_rng = np.random.default_rng(cfg.seed + 1)
    net_params = [t for name, t in model.named_params()
                  if not name.startswith("rate_model.")]
    opt_nets = ad.Adam(net_params, lr=cfg.lr)
    opt_aux = ad.Adam([model.rate_model.log_scale_luma,
                       model.rate_model.log_scale_chroma], lr=1e-2)
    history = []
    for step in range(1, cfg.iterations + 1):
        if cfg.lr_decay_every and step % cfg.lr_decay_every == 0:
            opt_nets.lr *= cfg.lr_decay
        idx = data_rng.integers(0, patches.shape[0], size=cfg.batch)
        report = train_step(model, patches[idx], cfg, noise_rng,
                            opt_nets, opt_aux, step)
        if step % log_every == 0 or step == 1 or step == cfg.iterations:
            history.append(report)
            if on_step is not None:
                on_step(report)
    return history


# ---------------------------------------------------------------------------
# hard (real codec) paths

@dataclass
class EncodeResult:
    jpeg: JpegBytes
    tables: QuantTableSet
    thumbnail: PlanarImage          # the rounded LR image fed to the codec
    y_ref: PlanarImage              # bicubic guidance reference (byte range)
    encode_ms: float


@dataclass
class DecodeResult:
    hr: PlanarImage                 # byte-range reconstruction
    thumbnail: PlanarImage          # decoded LR pixels
    decode_ms: float
    extractor_ms: float
    trunk_ms: float


def _thumbnail_from_encoder(model: TrainedModel, x_unit: np.ndarray) -> PlanarImage:
    y = encode_lr(ad.Tensor(x_unit[None]), model.encoder)
    bytes_ = np.clip(np.floor(y.data[0] * 255.0 + 0.5), 0, 255)
    return PlanarImage(bytes_, ColorSpace.RGB, ValueRange.BYTE)


def encode_with_model(img: PlanarImage, model: TrainedModel | None,
                      mode: TableMode, scale: int,
                      quality_factor: float = 1.0,
                      lambda2_tables: float = 150.0,
                      opt_iterations: int = 120,
                      rng: np.random.Generator | None = None) -> EncodeResult:
    """Produce the thumbnail JPEG for an HR image under the chosen mode.

    fixed mode needs no model (bicubic thumbnail, Annex-K tables); qpm
    and opt modes require one.  ``quality_factor`` scales the tables to
    sweep the RD curve.
    """
    img = img.to_byte_range()
    if img.height % scale or img.width % scale:
        raise ValueError(f"image dims {(img.height, img.width)} must be "
                         f"divisible by the scale factor {scale}")
    t0 = time.perf_counter()
    y_ref = bicubic_downsample(img, scale)

    if mode is TableMode.FIXED_ANNEX_K:
        thumb = PlanarImage(np.clip(np.floor(y_ref.samples + 0.5), 0, 255),
                            ColorSpace.RGB, ValueRange.BYTE)
        tables = annex_k_tables()
    else:
        if model is None:
            raise ValueError(f"mode {mode.value!r} requires a trained model")
        if img.height % (8 * scale) or img.width % (8 * scale):
            raise ValueError(f"image dims {(img.height, img.width)} must be "
                             f"divisible by {8 * scale} for the encoder")
        thumb = _thumbnail_from_encoder(model, img.samples / 255.0)
        if mode is TableMode.QPM_PREDICT:
            tables = integerize_tables(
                predict_tables(image_to_raw_grid(thumb), model.qpm))
        else:
            from ..qpm import TableOptimizerConfig, direct_optimize_tables
            cfg = TableOptimizerConfig(lambda2=lambda2_tables,
                                       iterations=opt_iterations)
            tables = integerize_tables(direct_optimize_tables(
                thumb, model.rate_model, config=cfg,
                rng=rng if rng is not None else np.random.default_rng(0)))

    if quality_factor != 1.0:
        tables = quality_scale(tables, quality_factor)
    jpeg = jpeg_encode(thumb, tables)
    # the JPEG carries LR dims; HR dims ride along for bpp bookkeeping
    jpeg = JpegBytes(jpeg.data, img.height, img.width)
    return EncodeResult(jpeg, tables, thumb, y_ref,
                        (time.perf_counter() - t0) * 1e3)


def decode_with_model(jpeg: JpegBytes, model: TrainedModel, scale: int,
                      use_freq: bool = True) -> DecodeResult:
    """Reconstruct HR from a thumbnail JPEG with the trained decoder."""
    t0 = time.perf_counter()
    res = jpeg_decode(jpeg)
    y_hat = ad.Tensor(res.pixels.samples[None] / 255.0)

    t1 = time.perf_counter()
    c_hat = coeff_tensor_from_grid(res.coefficients)
    feats = model.extractor(c_hat)
    t2 = time.perf_counter()
    if not use_freq:
        feats = ad.Tensor(np.zeros_like(feats.data))
    hr = ad.clamp_passthrough(model.decoder(y_hat, feats), 0.0, 1.0)
    t3 = time.perf_counter()

    hr_img = PlanarImage(np.clip(np.floor(hr.data[0] * 255.0 + 0.5), 0, 255),
                         ColorSpace.RGB, ValueRange.BYTE)
    return DecodeResult(hr_img, res.pixels, (t3 - t0) * 1e3,
                        (t2 - t1) * 1e3, (t3 - t2) * 1e3)


def testtime_finetune(img: PlanarImage, model: TrainedModel, cfg: TrainConfig,
                      iterations: int = 100, lr: float = 2e-4,
                      quality_factor: float = 1.0) -> tuple:
    """Per-image optimization of encoder, QPM, and entropy model with the
    decoder and extractor frozen.

    Full-resolution, batch of one.  Returns (EncodeResult, tuned model);
    the original model is never touched, and the tuned copy shares the
    decoder/extractor arrays bit for bit.
    """
    img = img.to_byte_range()
    tuned = TrainedModel(cfg)
    tuned.load_arrays(model.arrays())

    if iterations > 0:
        x_unit = img.samples / 255.0
        trainable = []
        for group in ("encoder.", "qpm.", "rate_model."):
            trainable.extend(t for name, t in tuned.named_params()
                             if name.startswith(group))
        opt = ad.Adam(trainable, lr=lr)
        noise_rng = np.random.default_rng(cfg.seed + 2)
        batch = x_unit[None]
        for step in range(1, iterations + 1):
            loss, *_rest = _batch_losses(tuned, batch, cfg, noise_rng)
            if not np.isfinite(loss.data):
                raise FloatingPointError(f"non-finite fine-tune loss at step {step}")
            opt.zero_grad()
            ad.backward(loss)
            opt.step()

    result = encode_with_model(img, tuned, TableMode.QPM_PREDICT, cfg.scale,
                               quality_factor=quality_factor)
    return result, tuned
