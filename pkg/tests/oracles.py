"""Independent reference implementations used as test oracles.

Everything here is deliberately naive (loops, quadratic forms, direct
summation) and never shares code with the production paths it checks.
"""

from __future__ import annotations

import math

import numpy as np


def finite_difference(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of scalar-valued f at x."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return grad


def max_rel_err(got: np.ndarray, want: np.ndarray, atol: float = 1e-10) -> float:
    """Largest elementwise relative error with an absolute-tolerance guard."""
    got = np.asarray(got, dtype=np.float64)
    want = np.asarray(want, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(got), np.abs(want)), 1e-8)
    err = np.abs(got - want) / denom
    err[np.abs(got - want) <= atol] = 0.0
    return float(err.max()) if err.size else 0.0


def naive_dct2(block: np.ndarray) -> np.ndarray:
    """O(n^4) orthonormal 2-d DCT-II of one 8x8 block."""
    n = 8
    out = np.zeros((n, n))
    for u in range(n):
        for v in range(n):
            cu = 1.0 / math.sqrt(2.0) if u == 0 else 1.0
            cv = 1.0 / math.sqrt(2.0) if v == 0 else 1.0
            s = 0.0
            for x in range(n):
                for y in range(n):
                    s += (block[x, y]
                          * math.cos((2 * x + 1) * u * math.pi / (2 * n))
                          * math.cos((2 * y + 1) * v * math.pi / (2 * n)))
            out[u, v] = 0.25 * cu * cv * s
    return out


def naive_idct2(coeffs: np.ndarray) -> np.ndarray:
    """O(n^4) inverse of :func:`naive_dct2`."""
    n = 8
    out = np.zeros((n, n))
    for x in range(n):
        for y in range(n):
            s = 0.0
            for u in range(n):
                for v in range(n):
                    cu = 1.0 / math.sqrt(2.0) if u == 0 else 1.0
                    cv = 1.0 / math.sqrt(2.0) if v == 0 else 1.0
                    s += (cu * cv * coeffs[u, v]
                          * math.cos((2 * x + 1) * u * math.pi / (2 * n))
                          * math.cos((2 * y + 1) * v * math.pi / (2 * n)))
            out[x, y] = 0.25 * s
    return out


def cubic_kernel(t: float, a: float = -0.5) -> float:
    """Catmull-Rom cubic (a = -0.5)."""
    t = abs(t)
    if t <= 1.0:
        return (a + 2.0) * t ** 3 - (a + 3.0) * t ** 2 + 1.0
    if t < 2.0:
        return a * t ** 3 - 5.0 * a * t ** 2 + 8.0 * a * t - 4.0 * a
    return 0.0


def naive_bicubic_downsample(plane: np.ndarray, s: int) -> np.ndarray:
    """Direct-summation anti-aliased bicubic downsample of one plane."""
    h, w = plane.shape
    oh, ow = h // s, w // s
    out = np.zeros((oh, ow))
    for oy in range(oh):
        for ox in range(ow):
            cy = (oy + 0.5) * s - 0.5
            cx = (ox + 0.5) * s - 0.5
            acc = 0.0
            wsum = 0.0
            for jy in range(math.ceil(cy - 2 * s), math.floor(cy + 2 * s) + 1):
                wy = cubic_kernel((jy - cy) / s)
                if wy == 0.0:
                    continue
                for jx in range(math.ceil(cx - 2 * s), math.floor(cx + 2 * s) + 1):
                    wx = cubic_kernel((jx - cx) / s)
                    if wx == 0.0:
                        continue
                    yy = min(max(jy, 0), h - 1)
                    xx = min(max(jx, 0), w - 1)
                    acc += wy * wx * plane[yy, xx]
                    wsum += wy * wx
            out[oy, ox] = acc / wsum
    return out


def loop_psnr(a: np.ndarray, b: np.ndarray, peak: float = 255.0,
              cap: float = 99.0) -> float:
    """Two-loop PSNR over all samples of byte-range images."""
    total = 0.0
    count = 0
    for p, q in zip(np.asarray(a).reshape(-1), np.asarray(b).reshape(-1)):
        total += (float(p) - float(q)) ** 2
        count += 1
    mse = total / count
    if mse == 0.0:
        return cap
    return min(cap, 10.0 * math.log10(peak * peak / mse))


def empirical_entropy_bits(samples: np.ndarray) -> float:
    """Plug-in entropy (bits/symbol) of integer-valued samples."""
    _, counts = np.unique(np.asarray(samples, dtype=np.int64), return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def spearman_rho(a, b) -> float:
    """Spearman rank correlation via Pearson on midranks."""
    def ranks(v):
        v = np.asarray(v, dtype=np.float64)
        order = np.argsort(v, kind="mergesort")
        r = np.empty(v.size)
        r[order] = np.arange(1, v.size + 1)
        # midranks for ties
        for val in np.unique(v):
            mask = v == val
            if mask.sum() > 1:
                r[mask] = r[mask].mean()
        return r

    ra, rb = ranks(a), ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    return float((ra * rb).sum() / np.sqrt((ra * ra).sum() * (rb * rb).sum()))
