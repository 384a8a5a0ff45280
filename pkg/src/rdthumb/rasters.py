"""Raster file I/O: 8-bit RGB PNG and binary PPM (P6)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .planar import ColorSpace, PlanarImage, ValueRange

__all__ = ["load_image", "save_png", "save_ppm"]


def load_image(path) -> PlanarImage:
    """Read a PNG or PPM file into byte-range RGB."""
    path = Path(path)
    if path.suffix.lower() in (".ppm", ".pnm"):
        return _load_ppm(path)
    with Image.open(path) as img:
        rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    return PlanarImage(rgb.transpose(2, 0, 1), ColorSpace.RGB, ValueRange.BYTE)


def save_png(path, img: PlanarImage) -> None:
    data = img.rounded_bytes().transpose(1, 2, 0)
    Image.fromarray(data, mode="RGB").save(path, format="PNG")


def _load_ppm(path: Path) -> PlanarImage:
    raw = path.read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    if fields[0] != b"P6":
        raise ValueError(f"{path}: not a binary PPM (P6) file")
    width, height, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PPM supported, maxval={maxval}")
    pos += 1                                     # single whitespace after maxval
    pixels = np.frombuffer(raw, dtype=np.uint8, count=width * height * 3, offset=pos)
    arr = pixels.reshape(height, width, 3).astype(np.float64).transpose(2, 0, 1)
    return PlanarImage(arr, ColorSpace.RGB, ValueRange.BYTE)


def save_ppm(path, img: PlanarImage) -> None:
    data = img.rounded_bytes().transpose(1, 2, 0)
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + data.tobytes())
