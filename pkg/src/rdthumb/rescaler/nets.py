"""Desk-scale networks: U-Net encoder with dense residual blocks, the
frequency feature extractor over DCT coefficients, and the sub-pixel
upsampling decoder (efficient and full variants)."""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff.nn import Conv2d
from .bicubic import bicubic_upsample_graph

__all__ = ["ResidualDenseBlock", "RRDB", "ResConvBlock", "EncoderNet",
           "FreqExtractor", "DecoderNet", "FREQ_CHANNELS", "FREQ_FEATURES"]

FREQ_CHANNELS = 192      # 3 color channels x 64 frequencies
FREQ_FEATURES = 24       # feature planes handed to the decoder

_SLOPE = 0.2


class ResidualDenseBlock:
    """Five densely connected convs; the result is residual-scaled by 0.2."""

    def __init__(self, channels: int, growth: int, rng):
        self.convs = []
        c = channels
        for _ in range(4):
            self.convs.append(Conv2d(c, growth, 3, rng=rng))
            c += growth
        self.convs.append(Conv2d(c, channels, 3, rng=rng))

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        feats = [x]
        for conv in self.convs[:-1]:
            inp = feats[0] if len(feats) == 1 else ad.concat(feats, axis=1)
            feats.append(ad.leaky_relu(conv(inp), _SLOPE))
        out = self.convs[-1](ad.concat(feats, axis=1))
        return ad.add(x, ad.mul_scalar(out, 0.2))

    def params(self):
        return [("convs", self.convs)]


class RRDB:
    """Residual-in-residual: three dense blocks under one 0.2-scaled skip."""

    def __init__(self, channels: int, growth: int, rng):
        self.blocks = [ResidualDenseBlock(channels, growth, rng) for _ in range(3)]

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        out = x
        for block in self.blocks:
            out = block(out)
        return ad.add(x, ad.mul_scalar(ad.sub(out, x), 0.2))

    def params(self):
        return [("blocks", self.blocks)]


class ResConvBlock:
    """conv-ReLU-conv with an identity skip (EDSR-style)."""

    def __init__(self, channels: int, rng):
        self.conv1 = Conv2d(channels, channels, 3, rng=rng)
        self.conv2 = Conv2d(channels, channels, 3, rng=rng)

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        return ad.add(x, self.conv2(ad.relu(self.conv1(x))))

    def params(self):
        return [("conv1", self.conv1), ("conv2", self.conv2)]


def _lrelu(x):
    return ad.leaky_relu(x, _SLOPE)


class EncoderNet:
    """HR image -> LR embedding, a two-level U-Net over an initial
    sub-pixel rearrangement by the scale factor.

    The final conv starts at zero weight with 0.5 bias so an untrained
    encoder emits a mid-gray thumbnail.
    """

    def __init__(self, scale: int = 4, base: int = 16, rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        if scale not in (2, 4):
            raise ValueError(f"scale must be 2 or 4, got {scale}")
        self.scale = scale
        self.base = base
        c0, c1, c2 = base, base * 2, base * 4

        self.head = Conv2d(3 * scale * scale, c0, 3, rng=rng)
        self.head_rdb = ResidualDenseBlock(c0, c0 // 2, rng)

        self.down1 = [Conv2d(c0, c1, 3, rng=rng), Conv2d(c1, c1, 3, rng=rng)]
        self.down1_rdb = ResidualDenseBlock(c1, c1 // 2, rng)
        self.down2 = [Conv2d(c1, c2, 3, rng=rng), Conv2d(c2, c2, 3, rng=rng)]
        self.down2_rdb = ResidualDenseBlock(c2, c2 // 2, rng)

        self.up1_expand = Conv2d(c2, c1 * 4, 3, rng=rng)
        self.up1 = [Conv2d(c1 * 2, c1, 3, rng=rng), Conv2d(c1, c1, 3, rng=rng)]
        self.up1_rdb = ResidualDenseBlock(c1, c1 // 2, rng)
        self.up2_expand = Conv2d(c1, c0 * 4, 3, rng=rng)
        self.up2 = [Conv2d(c0 * 2, c0, 3, rng=rng), Conv2d(c0, c0, 3, rng=rng)]
        self.up2_rdb = ResidualDenseBlock(c0, c0 // 2, rng)

        self.tail = Conv2d(c0, 3, 3, rng=rng, zero_init=True, bias_fill=0.5)

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        if x.shape[2] % (8 * self.scale) or x.shape[3] % (8 * self.scale):
            raise ValueError(f"input dims {x.shape[2:]} must be divisible by "
                             f"{8 * self.scale}")
        h = _lrelu(self.head(ad.pixel_unshuffle(x, self.scale)))
        skip0 = self.head_rdb(h)

        d1 = ad.max_pool2x2(skip0)
        d1 = _lrelu(self.down1[1](_lrelu(self.down1[0](d1))))
        skip1 = self.down1_rdb(d1)

        d2 = ad.max_pool2x2(skip1)
        d2 = _lrelu(self.down2[1](_lrelu(self.down2[0](d2))))
        d2 = self.down2_rdb(d2)

        u1 = ad.pixel_shuffle(self.up1_expand(d2), 2)
        u1 = ad.concat([u1, skip1], axis=1)
        u1 = _lrelu(self.up1[1](_lrelu(self.up1[0](u1))))
        u1 = self.up1_rdb(u1)

        u2 = ad.pixel_shuffle(self.up2_expand(u1), 2)
        u2 = ad.concat([u2, skip0], axis=1)
        u2 = _lrelu(self.up2[1](_lrelu(self.up2[0](u2))))
        u2 = self.up2_rdb(u2)

        return self.tail(u2)

    def params(self):
        return [("head", self.head), ("head_rdb", self.head_rdb),
                ("down1", self.down1), ("down1_rdb", self.down1_rdb),
                ("down2", self.down2), ("down2_rdb", self.down2_rdb),
                ("up1_expand", self.up1_expand), ("up1", self.up1),
                ("up1_rdb", self.up1_rdb), ("up2_expand", self.up2_expand),
                ("up2", self.up2), ("up2_rdb", self.up2_rdb),
                ("tail", self.tail)]


class FreqExtractor:
    """Dequantized-coefficient planes (192, h/8, w/8) -> features
    (24, h, w) via residual convs and three 2x sub-pixel stages.

    The very last conv is zero-initialized: with zero coefficients (or an
    untrained net) the decoder sees exactly no frequency signal.
    """

    def __init__(self, blocks: int = 4, width: int = FREQ_FEATURES, rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.width = width
        self.head = Conv2d(FREQ_CHANNELS, width, 3, rng=rng)
        self.blocks = [ResConvBlock(width, rng) for _ in range(blocks)]
        self.up = [Conv2d(width, width * 4, 3, rng=rng) for _ in range(2)]
        self.up.append(Conv2d(width, width * 4, 3, rng=rng, zero_init=True))

    def __call__(self, c_hat: ad.Tensor) -> ad.Tensor:
        if c_hat.shape[1] != FREQ_CHANNELS:
            raise ValueError(f"expected {FREQ_CHANNELS} coefficient channels, "
                             f"got {c_hat.shape[1]}")
        h = self.head(c_hat)
        for block in self.blocks:
            h = block(h)
        for conv in self.up:
            h = ad.pixel_shuffle(conv(h), 2)
        return h

    def params(self):
        return [("head", self.head), ("blocks", self.blocks), ("up", self.up)]


class DecoderNet:
    """Thumbnail pixels + frequency features -> HR reconstruction.

    The trunk is EDSR-like (plain residual blocks) in the efficient
    variant and RRDB-based in the full variant; the network output is a
    zero-initialized residual on top of a fixed bicubic upsample of the
    thumbnail, so an untrained decoder reproduces the bicubic baseline.
    """

    def __init__(self, scale: int = 4, width: int = 24, blocks: int = 4,
                 variant: str = "efficient", rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        if scale not in (2, 4):
            raise ValueError(f"scale must be 2 or 4, got {scale}")
        if variant not in ("efficient", "full"):
            raise ValueError(f"unknown decoder variant {variant!r}")
        self.scale = scale
        self.width = width
        self.variant = variant
        self.head = Conv2d(3 + FREQ_FEATURES, width, 3, rng=rng)
        if variant == "efficient":
            self.trunk = [ResConvBlock(width, rng) for _ in range(blocks)]
        else:
            self.trunk = [RRDB(width, max(4, width // 2), rng) for _ in range(blocks)]
        self.fuse = Conv2d(width, width, 3, rng=rng)
        # each stage is conv + 2x shuffle; the last one emits the 3-channel
        # residual directly (3*4 channels pre-shuffle), zero-initialized
        n_up = int(np.log2(scale))
        self.up = [Conv2d(width, width * 4, 3, rng=rng) for _ in range(n_up - 1)]
        self.up.append(Conv2d(width, 12, 3, rng=rng, zero_init=True))

    def __call__(self, y_hat: ad.Tensor, feats: ad.Tensor) -> ad.Tensor:
        if y_hat.shape[2:] != feats.shape[2:] or y_hat.shape[0] != feats.shape[0]:
            raise ValueError(f"thumbnail {y_hat.shape} and features {feats.shape} "
                             "must share batch and spatial dims")
        h = self.head(ad.concat([y_hat, feats], axis=1))
        trunk_in = h
        for block in self.trunk:
            h = block(h)
        h = ad.add(self.fuse(h), trunk_in)
        for conv in self.up:
            h = ad.pixel_shuffle(conv(h), 2)
        return ad.add(bicubic_upsample_graph(y_hat, self.scale), h)

    def params(self):
        return [("head", self.head), ("trunk", self.trunk), ("fuse", self.fuse),
                ("up", self.up)]
