"""Integer sample reconstruction matching libjpeg's default decode path.

Stock JPEG decoders reconstruct pixels with the classic 13-bit fixed
point "islow" IDCT followed by a 16-bit fixed-point YCbCr->RGB stage.
Reproducing that arithmetic bit for bit keeps our decoded pixels within
one level of (in practice, identical to) any libjpeg-derived decoder.

Everything here is pure integer math on int64 arrays; the float DCT in
:mod:`rdthumb.jpeg.dct` remains the reference transform for coefficients.
"""

from __future__ import annotations

import numpy as np

__all__ = ["idct8x8_islow", "ycc_to_rgb_fixed"]

_CONST_BITS = 13
_PASS1_BITS = 2

_F_0_298631336 = 2446
_F_0_390180644 = 3196
_F_0_541196100 = 4433
_F_0_765366865 = 6270
_F_0_899976223 = 7373
_F_1_175875602 = 9633
_F_1_501321110 = 12299
_F_1_847759065 = 15137
_F_1_961570560 = 16069
_F_2_053119869 = 16819
_F_2_562915447 = 20995
_F_3_072711026 = 25172


def _descale(x: np.ndarray, n: int) -> np.ndarray:
    return (x + (1 << (n - 1))) >> n


def _butterfly(d0, d1, d2, d3, d4, d5, d6, d7):
    """One 8-point islow pass; returns the eight un-descaled outputs."""
    z2, z3 = d2, d6
    z1 = (z2 + z3) * _F_0_541196100
    t2 = z1 - z3 * _F_1_847759065
    t3 = z1 + z2 * _F_0_765366865
    z2, z3 = d0, d4
    t0 = (z2 + z3) << _CONST_BITS
    t1 = (z2 - z3) << _CONST_BITS
    e0, e3 = t0 + t3, t0 - t3
    e1, e2 = t1 + t2, t1 - t2

    t0, t1, t2, t3 = d7, d5, d3, d1
    z1 = t0 + t3
    z2 = t1 + t2
    z3 = t0 + t2
    z4 = t1 + t3
    z5 = (z3 + z4) * _F_1_175875602
    t0 = t0 * _F_0_298631336
    t1 = t1 * _F_2_053119869
    t2 = t2 * _F_3_072711026
    t3 = t3 * _F_1_501321110
    z1 = -z1 * _F_0_899976223
    z2 = -z2 * _F_2_562915447
    z3 = -z3 * _F_1_961570560 + z5
    z4 = -z4 * _F_0_390180644 + z5
    t0 += z1 + z3
    t1 += z2 + z4
    t2 += z2 + z3
    t3 += z1 + z4

    return (e0 + t3, e1 + t2, e2 + t1, e3 + t0,
            e3 - t0, e2 - t1, e1 - t2, e0 - t3)


def idct8x8_islow(deq: np.ndarray) -> np.ndarray:
    """Dequantized integer coefficients (...,8,8) -> samples in [0,255]."""
    d = np.ascontiguousarray(np.asarray(deq, dtype=np.int64))
    # Pass 1: transform columns (vertical frequencies down each column).
    ws = _butterfly(*(d[..., k, :] for k in range(8)))
    wsarr = np.stack([_descale(w, _CONST_BITS - _PASS1_BITS) for w in ws], axis=-2)

    # Pass 2: transform rows of the workspace.
    res = _butterfly(*(wsarr[..., :, j] for j in range(8)))
    out = np.empty(d.shape, dtype=np.int64)
    for x in range(8):
        out[..., :, x] = _descale(res[x], _CONST_BITS + _PASS1_BITS + 3)
    return np.clip(out + 128, 0, 255)


_SCALE = 16
_HALF = 1 << (_SCALE - 1)
_FIX_1_40200 = 91881
_FIX_1_77200 = 116130
_FIX_0_71414 = 46802
_FIX_0_34414 = 22554


def ycc_to_rgb_fixed(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> np.ndarray:
    """Fixed-point full-range BT.601 conversion as in libjpeg's decoder.

    Inputs are integer sample planes in [0, 255]; returns (3,H,W) uint8.
    """
    y = np.asarray(y, dtype=np.int64)
    xb = np.asarray(cb, dtype=np.int64) - 128
    xr = np.asarray(cr, dtype=np.int64) - 128
    r = y + ((_FIX_1_40200 * xr + _HALF) >> _SCALE)
    b = y + ((_FIX_1_77200 * xb + _HALF) >> _SCALE)
    g = y + ((-_FIX_0_34414 * xb - _FIX_0_71414 * xr + _HALF) >> _SCALE)
    return np.clip(np.stack([r, g, b]), 0, 255).astype(np.uint8)
