"""Quality metrics and the per-image rate-distortion report record."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .planar import PlanarImage

__all__ = ["PSNR_CAP", "mse_rgb", "psnr_rgb", "RdReport", "write_reports_csv",
           "read_reports_csv", "spearman_rho", "RD_CSV_HEADER"]

PSNR_CAP = 99.0


def _samples(img) -> np.ndarray:
    if isinstance(img, PlanarImage):
        return img.to_byte_range().samples
    return np.asarray(img, dtype=np.float64)


def mse_rgb(a, b) -> float:
    x, y = _samples(a), _samples(b)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    return float(np.mean((x - y) ** 2))


def psnr_rgb(a, b) -> float:
    """10*log10(255^2 / MSE) over all RGB samples, capped at 99 dB."""
    err = mse_rgb(a, b)
    if err == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(255.0 ** 2 / err))


@dataclass
class RdReport:
    """One image's rate-distortion record (CSV row)."""

    image_id: str
    mode: str
    quality_scale: float
    bpp: float
    lr_psnr_db: float
    hr_psnr_db: float
    encode_ms: float
    decode_ms: float

    def __post_init__(self):
        if self.bpp <= 0:
            raise ValueError(f"bpp must be positive, got {self.bpp}")
        for name in ("lr_psnr_db", "hr_psnr_db"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite (cap at {PSNR_CAP})")


RD_CSV_HEADER = [f.name for f in fields(RdReport)]


def write_reports_csv(path, reports: list[RdReport]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RD_CSV_HEADER)
        writer.writeheader()
        for r in reports:
            writer.writerow(asdict(r))


def read_reports_csv(path) -> list[RdReport]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(RdReport(
                image_id=row["image_id"], mode=row["mode"],
                quality_scale=float(row["quality_scale"]), bpp=float(row["bpp"]),
                lr_psnr_db=float(row["lr_psnr_db"]),
                hr_psnr_db=float(row["hr_psnr_db"]),
                encode_ms=float(row["encode_ms"]),
                decode_ms=float(row["decode_ms"])))
    return out


def spearman_rho(a, b) -> float:
    """Rank correlation (midranks for ties)."""
    def ranks(v):
        v = np.asarray(v, dtype=np.float64)
        order = np.argsort(v, kind="mergesort")
        r = np.empty(v.size)
        r[order] = np.arange(1, v.size + 1)
        for val, count in zip(*np.unique(v, return_counts=True)):
            if count > 1:
                mask = v == val
                r[mask] = r[mask].mean()
        return r

    ra, rb = ranks(a), ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    denom = math.sqrt(float((ra * ra).sum()) * float((rb * rb).sum()))
    if denom == 0.0:
        raise ValueError("rank correlation undefined for constant inputs")
    return float((ra * rb).sum() / denom)
