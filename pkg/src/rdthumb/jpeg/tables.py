"""Quantization tables and the coefficient scan order."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = ["TableForm", "QuantTableSet", "ANNEX_K_LUMA", "ANNEX_K_CHROMA",
           "annex_k_tables", "ZIGZAG_ORDER", "zigzag", "unzigzag",
           "round_half_away", "integerize_tables", "quality_scale"]


class TableForm(Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"


@dataclass
class QuantTableSet:
    """Luma and chroma quantization tables.

    Continuous form is what optimizers and the table predictor produce
    (entries >= 1.0); integer form is what goes into the bitstream
    (entries in [1, 255]).
    """

    q_luma: np.ndarray
    q_chroma: np.ndarray
    form: TableForm = TableForm.INTEGER

    def __post_init__(self):
        self.q_luma = np.asarray(self.q_luma, dtype=np.float64).reshape(8, 8)
        self.q_chroma = np.asarray(self.q_chroma, dtype=np.float64).reshape(8, 8)
        for name, q in (("q_luma", self.q_luma), ("q_chroma", self.q_chroma)):
            if np.any(q < 1.0) or np.any(q > 255.0):
                raise ValueError(f"{name} entries must lie in [1, 255]")
            if self.form is TableForm.INTEGER and np.any(q != np.round(q)):
                raise ValueError(f"{name} declared integer but has fractional entries")

    def copy(self) -> "QuantTableSet":
        return QuantTableSet(self.q_luma.copy(), self.q_chroma.copy(), self.form)


# ITU-T T.81 Annex K example tables (the fixed-table baseline).
ANNEX_K_LUMA = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.float64)

ANNEX_K_CHROMA = np.array([
    [17, 18, 24, 47, 99, 99, 99, 99],
    [18, 21, 26, 66, 99, 99, 99, 99],
    [24, 26, 56, 99, 99, 99, 99, 99],
    [47, 66, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
], dtype=np.float64)


def annex_k_tables(form: TableForm = TableForm.INTEGER) -> QuantTableSet:
    return QuantTableSet(ANNEX_K_LUMA.copy(), ANNEX_K_CHROMA.copy(), form)


# ZIGZAG_ORDER[i] is the natural (row-major) index stored at scan position i.
ZIGZAG_ORDER = np.array([
    0, 1, 8, 16, 9, 2, 3, 10,
    17, 24, 32, 25, 18, 11, 4, 5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13, 6, 7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
], dtype=np.int64)

_INVERSE_ZIGZAG = np.argsort(ZIGZAG_ORDER)


def zigzag(block: np.ndarray) -> np.ndarray:
    """(...,8,8) natural order -> (...,64) scan order."""
    flat = np.asarray(block).reshape(*block.shape[:-2], 64)
    return flat[..., ZIGZAG_ORDER]


def unzigzag(vec: np.ndarray) -> np.ndarray:
    """(...,64) scan order -> (...,8,8) natural order."""
    vec = np.asarray(vec)
    return vec[..., _INVERSE_ZIGZAG].reshape(*vec.shape[:-1], 8, 8)


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round half away from zero (symmetric in sign)."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def integerize_tables(q: QuantTableSet) -> QuantTableSet:
    """Continuous tables -> integer tables for the bitstream."""
    ql = np.clip(round_half_away(q.q_luma), 1, 255)
    qc = np.clip(round_half_away(q.q_chroma), 1, 255)
    return QuantTableSet(ql, qc, TableForm.INTEGER)


def quality_scale(q: QuantTableSet, factor: float) -> QuantTableSet:
    """Global quality knob: multiply both tables by ``factor`` and clamp.

    Larger factors mean coarser quantization and a lower bitrate.
    """
    if factor <= 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    ql = np.clip(q.q_luma * factor, 1.0, 255.0)
    qc = np.clip(q.q_chroma * factor, 1.0, 255.0)
    if q.form is TableForm.INTEGER:
        return QuantTableSet(round_half_away(ql), round_half_away(qc), TableForm.INTEGER)
    return QuantTableSet(ql, qc, TableForm.CONTINUOUS)
