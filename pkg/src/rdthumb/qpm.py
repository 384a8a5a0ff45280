"""Image-adaptive quantization tables.

Three routes produce the tables for an image: a learned per-block MLP
predictor averaged over blocks, a per-image gradient-descent optimizer of
the 128 table entries, and the fixed Annex-K baseline.  A global quality
scale on top of any of them sweeps the rate-distortion curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import autodiff as ad
from .autodiff.nn import Linear
from .graphops import block_idct_graph, ycc_to_rgb_graph
from .jpeg.blocks import CoeffKind, DctBlockGrid, image_to_raw_grid
from .jpeg.codec import jpeg_decode, jpeg_encode
from .jpeg.quantize import dequantize_soft, quantize_soft, quantize_soft_grid
from .jpeg.tables import (QuantTableSet, TableForm, annex_k_tables,
                          integerize_tables, round_half_away)
from .planar import ColorSpace, PlanarImage, pad_to_blocks
from .rate import (FactorizedRateModel, channel_bits, fit_aux, measured_bpp,
                   reshape_for_rate)

__all__ = ["TableMode", "TableOptimizerConfig", "QpmNetwork", "predict_tables",
           "predict_tables_graph", "direct_optimize_tables", "hard_rd_score",
           "COEFF_SCALE"]


class TableMode(Enum):
    QPM_PREDICT = "qpm"
    DIRECT_OPTIMIZE = "opt"
    FIXED_ANNEX_K = "fixed"


@dataclass
class TableOptimizerConfig:
    lambda2: float = 150.0        # rate weight against byte-scale MSE
    iterations: int = 120
    step_size: float = 2.0
    mode: TableMode = TableMode.DIRECT_OPTIMIZE

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.lambda2 < 0:
            raise ValueError("lambda2 must be >= 0")


# Fixed per-frequency input scaling keeps MLP activations O(1): the DC
# coefficient spans about +-1024, the AC terms a few hundred.
COEFF_SCALE = np.full(64, 128.0)
COEFF_SCALE[0] = 1024.0


class QpmNetwork:
    """Two 8-layer MLP table predictors (luma, chroma).

    The luma MLP reads one vectorized 64-coefficient block; the chroma
    MLP reads the Cb and Cr blocks of one position concatenated (128).
    Both emit 64 values mapped into [1, 255] by softplus(+1) and an upper
    clamp.
    """

    LAYERS = 8

    def __init__(self, hidden: int = 128, rng: np.random.Generator | None = None,
                 dtype=np.float64):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.hidden = hidden
        self.mlp_luma = self._stack(64, hidden, rng, dtype)
        self.mlp_chroma = self._stack(128, hidden, rng, dtype)

    def _stack(self, n_in: int, hidden: int, rng, dtype) -> list[Linear]:
        widths = [n_in] + [hidden] * (self.LAYERS - 1) + [64]
        return [Linear(widths[i], widths[i + 1], rng, dtype=dtype)
                for i in range(self.LAYERS)]

    def params(self):
        return [("luma", self.mlp_luma), ("chroma", self.mlp_chroma)]

    @staticmethod
    def _run(layers: list[Linear], x: ad.Tensor) -> ad.Tensor:
        for i, layer in enumerate(layers):
            x = layer(x)
            if i < len(layers) - 1:
                x = ad.leaky_relu(x, 0.2)
        # softplus + 1 guarantees entries > 1; the clamp caps at 255.
        return ad.clamp_passthrough(ad.add_scalar(ad.softplus(x), 1.0), 1.0, 255.0)

    def luma_tables(self, blocks: ad.Tensor) -> ad.Tensor:
        """(N, 64) raw luma blocks -> (N, 64) per-block tables."""
        return self._run(self.mlp_luma, blocks)

    def chroma_tables(self, blocks: ad.Tensor) -> ad.Tensor:
        """(N, 128) concatenated Cb|Cr blocks -> (N, 64) per-block tables."""
        return self._run(self.mlp_chroma, blocks)


def _standardize(blocks: np.ndarray) -> np.ndarray:
    """(N,8,8) -> (N,64) row-major vectors divided by the fixed scales."""
    return blocks.reshape(-1, 64) / COEFF_SCALE


def predict_tables_graph(luma_vecs: ad.Tensor, chroma_vecs: ad.Tensor,
                         net: QpmNetwork) -> tuple[ad.Tensor, ad.Tensor]:
    """Differentiable table prediction from standardized block vectors.

    Per-block MLP outputs are averaged over all blocks, giving one 64-d
    table per image; the mean aggregation makes the result invariant to
    block order and to duplicating every block.
    """
    q_luma = ad.mean_(net.luma_tables(luma_vecs), axis=0)
    q_chroma = ad.mean_(net.chroma_tables(chroma_vecs), axis=0)
    return q_luma, q_chroma


def predict_tables(grid: DctBlockGrid, net: QpmNetwork) -> QuantTableSet:
    """Predict continuous tables for a raw coefficient grid."""
    if grid.kind is not CoeffKind.RAW:
        raise ValueError(f"predict_tables expects a raw grid, got {grid.kind.value}")
    if grid.n_blocks == 0:
        raise ValueError("predict_tables needs at least one block")
    luma = ad.Tensor(_standardize(grid.y))
    chroma = ad.Tensor(np.concatenate([_standardize(grid.cb), _standardize(grid.cr)],
                                      axis=1))
    ql, qc = predict_tables_graph(luma, chroma, net)
    return QuantTableSet(ql.data.reshape(8, 8), qc.data.reshape(8, 8),
                         TableForm.CONTINUOUS)


# ---------------------------------------------------------------------------
# direct per-image table optimization

# Weight of the noise-relaxed distortion term inside the optimizer
# objective; the rest comes from the hard-path term (see _rd_terms).
_SOFT_DISTORTION_WEIGHT = 0.15


def _rd_terms(c_chan: list[ad.Tensor], q_l: ad.Tensor, q_c: ad.Tensor,
              target_rgb: np.ndarray, rows: int, cols: int,
              model: FactorizedRateModel,
              rng: np.random.Generator | None) -> tuple[ad.Tensor, ad.Tensor]:
    """One objective evaluation: (byte-scale RGB MSE, estimated bits).

    The rate branch follows the additive-noise relaxation (quantize_soft)
    so the entropy model sees what it is trained on.  Distortion blends
    two reconstructions:

    * the hard path, with the rounded levels n = round(C/Q) held constant
      under stop-gradient, whose error C - n*Q is exactly differentiable
      in Q almost everywhere and is free on channels that round to zero;
    * the noise-relaxed path (same relaxation as training), scaled down,
      which keeps a gradient alive on zero-level channels so pure
      distortion minimization still drives every entry to the floor.

    A ``None`` rng pins the rate/relaxation noise to zero (used by
    gradient checks).
    """
    shifted_hard = []
    shifted_soft = []
    bits = None
    for ch in range(3):
        table = q_l if ch == 0 else q_c
        log_scales = model.log_scale_luma if ch == 0 else model.log_scale_chroma
        tshape = ad.reshape(table, (1, 64, 1, 1))
        if rng is None:
            denom = ad.expand(tshape, (1, 64, rows, cols))
            c_noise = None
        else:
            q_noise = ad.Tensor(rng.uniform(-0.5, 0.5, size=(1, 64, 1, 1)))
            denom = ad.expand(ad.add(tshape, q_noise), (1, 64, rows, cols))
            c_noise = rng.uniform(-0.5, 0.5, size=(1, 64, rows, cols))
        c_tilde = quantize_soft(c_chan[ch], denom, c_noise)
        term = channel_bits(c_tilde, log_scales)
        bits = term if bits is None else ad.add(bits, term)
        shifted_soft.append(block_idct_graph(dequantize_soft(c_tilde, denom)))

        levels = round_half_away(c_chan[ch].data / table.data.reshape(1, 64, 1, 1))
        c_hat = ad.mul(ad.Tensor(levels), ad.expand(tshape, (1, 64, rows, cols)))
        shifted_hard.append(block_idct_graph(c_hat))

    target = ad.Tensor(target_rgb[None])

    def rgb_mse(parts):
        rgb = ycc_to_rgb_graph(ad.concat(parts, axis=1))
        return ad.mean_(ad.square(ad.sub(rgb, target)))

    mse = ad.add(rgb_mse(shifted_hard),
                 ad.mul_scalar(rgb_mse(shifted_soft), _SOFT_DISTORTION_WEIGHT))
    return mse, bits


def hard_rd_score(img: PlanarImage, q: QuantTableSet, lambda2: float) -> tuple:
    """Real-codec evaluation: (MSE + lambda2*bpp, MSE, bpp), byte scale.

    Distortion and rate are both measured after actual hard quantization
    through the bitstream, i.e. what a standard decoder would see.
    """
    qi = integerize_tables(q) if q.form is TableForm.CONTINUOUS else q
    jb = jpeg_encode(img, qi)
    res = jpeg_decode(jb)
    mse = float(np.mean((res.pixels.samples - img.to_byte_range().samples) ** 2))
    bpp = measured_bpp(jb, img.height, img.width)
    return mse + lambda2 * bpp, mse, bpp


def direct_optimize_tables(img: PlanarImage, rate_model: FactorizedRateModel,
                           lambda2: float | None = None,
                           config: TableOptimizerConfig | None = None,
                           rng: np.random.Generator | None = None) -> QuantTableSet:
    """Optimize the 128 table entries for one image by gradient descent.

    The objective is the soft-quantization RGB distortion plus
    lambda2 * estimated bits; the entropy-model scales are optimized
    jointly (their only incentive is likelihood).  Tables start from
    Annex-K and are projected into [1, 255] after every step.  Every few
    steps the candidate is scored through the real codec and the best
    hard-quantized Lagrangian seen -- including the Annex-K start -- wins,
    so an exhausted budget can never return something worse than the
    baseline.
    """
    config = config or TableOptimizerConfig()
    if lambda2 is None:
        lambda2 = config.lambda2
    if img.space is not ColorSpace.RGB:
        raise ValueError("direct_optimize_tables expects an RGB image")
    rng = rng if rng is not None else np.random.default_rng(0)

    img = pad_to_blocks(img.to_byte_range())
    grid = image_to_raw_grid(img)
    rows, cols = grid.block_rows, grid.block_cols
    layout = reshape_for_rate(grid)
    c_chan = [ad.Tensor(layout[c][None]) for c in range(3)]
    target_rgb = img.samples

    q_l = ad.parameter(annex_k_tables().q_luma.reshape(64).copy())
    q_c = ad.parameter(annex_k_tables().q_chroma.reshape(64).copy())
    model = rate_model.copy()
    # Tables tolerate large steps; the log-scales do not (a floored
    # probability kills the rate gradient), so they get their own group.
    opt_tables = ad.Adam([q_l, q_c], lr=config.step_size)
    opt_scales = ad.Adam([model.log_scale_luma, model.log_scale_chroma], lr=0.05)

    # Warm-start the densities on the initial quantization so the rate
    # term is meaningful from the first step.
    grid_soft = quantize_soft_grid(grid, annex_k_tables(TableForm.CONTINUOUS), rng)
    fit_aux(model, [reshape_for_rate(grid_soft)], epochs=40, lr=0.1)

    def current() -> QuantTableSet:
        return QuantTableSet(q_l.data.reshape(8, 8).copy(),
                             q_c.data.reshape(8, 8).copy(), TableForm.CONTINUOUS)

    n_pixels = img.height * img.width
    best_tables = current()
    best_score = hard_rd_score(img, best_tables, lambda2)[0]

    for it in range(config.iterations):
        opt_tables.zero_grad()
        opt_scales.zero_grad()
        mse, bits = _rd_terms(c_chan, q_l, q_c, target_rgb, rows, cols, model, rng)
        loss = ad.add(mse, ad.mul_scalar(bits, lambda2 / n_pixels))
        ad.backward(loss)
        opt_tables.step()
        opt_scales.step()
        q_l.data = np.clip(q_l.data, 1.0, 255.0)
        q_c.data = np.clip(q_c.data, 1.0, 255.0)

        if (it + 1) % 10 == 0 or it == config.iterations - 1:
            cand = current()
            score = hard_rd_score(img, cand, lambda2)[0]
            if score < best_score:
                best_score = score
                best_tables = cand
    return best_tables
