"""Seeded synthetic image corpora for desk-scale experiments.

Images mix a 1/f-filtered noise base with smooth gradients, a few hard
edges, and oriented texture patches, then share a mild channel coupling,
giving JPEG-friendly statistics (energy concentrated at low frequencies)
without shipping photographic datasets.
"""

from __future__ import annotations

import numpy as np

from .planar import ColorSpace, PlanarImage, ValueRange

__all__ = ["toy_image", "toy_corpus", "toy_patches"]


def _spectral_noise(rng: np.random.Generator, h: int, w: int, slope: float) -> np.ndarray:
    """Real-valued noise with a ~1/f^slope amplitude spectrum in [0,1]."""
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    radius = np.sqrt(fy * fy + fx * fx)
    radius[0, 0] = 1.0
    spectrum = (rng.normal(size=(h, w)) + 1j * rng.normal(size=(h, w))) / radius ** slope
    spectrum[0, 0] = 0.0
    field = np.fft.ifft2(spectrum).real
    field -= field.min()
    peak = field.max()
    return field / peak if peak > 0 else field


def toy_image(rng: np.random.Generator, height: int = 64, width: int = 64) -> PlanarImage:
    """One synthetic RGB image in byte range."""
    luma = 0.55 * _spectral_noise(rng, height, width, rng.uniform(1.8, 2.4))

    yy, xx = np.meshgrid(np.linspace(0, 1, height), np.linspace(0, 1, width),
                         indexing="ij")
    luma += rng.uniform(-0.35, 0.35) * yy + rng.uniform(-0.35, 0.35) * xx

    for _ in range(rng.integers(2, 5)):
        # flat patches with sharp boundaries (the recoverable structure)
        y0, x0 = rng.integers(0, 3 * height // 4), rng.integers(0, 3 * width // 4)
        hh = rng.integers(height // 8, height // 2)
        ww = rng.integers(width // 8, width // 2)
        luma[y0:y0 + hh, x0:x0 + ww] += rng.uniform(-0.3, 0.3)

    if rng.uniform() < 0.5:
        # one gentle oriented texture band
        freq = rng.uniform(0.05, 0.18)
        theta = rng.uniform(0, np.pi)
        wave = np.sin(2 * np.pi * freq * (np.cos(theta) * xx * width
                                          + np.sin(theta) * yy * height)
                      + rng.uniform(0, 2 * np.pi))
        lo, hi = sorted(rng.integers(0, height, size=2).tolist())
        luma[lo:hi] += 0.07 * wave[lo:hi]

    chroma_u = 0.3 * _spectral_noise(rng, height, width, 2.4) - 0.15
    chroma_v = 0.3 * _spectral_noise(rng, height, width, 2.4) - 0.15
    r = luma + 1.1 * chroma_v
    g_ = luma - 0.4 * chroma_u - 0.6 * chroma_v
    b = luma + 1.6 * chroma_u
    img = np.stack([r, g_, b])
    img = (img - img.min()) / max(img.max() - img.min(), 1e-9)
    return PlanarImage(np.round(img * 255.0), ColorSpace.RGB, ValueRange.BYTE)


def toy_corpus(n: int, height: int = 64, width: int = 64,
               seed: int = 0) -> list[PlanarImage]:
    rng = np.random.default_rng(seed)
    return [toy_image(rng, height, width) for _ in range(n)]


def toy_patches(n: int, patch: int = 64, seed: int = 0) -> np.ndarray:
    """(n, 3, patch, patch) float array in [0, 1] for training."""
    imgs = toy_corpus(n, patch, patch, seed)
    return np.stack([im.samples for im in imgs]) / 255.0
