"""Versioned binary checkpoint container.

Byte layout (all integers little-endian):

    magic    4 bytes  b"RTCK"
    version  u16      currently 1
    meta_len u32      followed by meta_len bytes of UTF-8 JSON metadata
    count    u32      number of named arrays, then per array:
        name_len u16, name bytes (UTF-8)
        dtype    u8   0 = float64, 1 = float32
        ndim     u8, then ndim x u32 dims
        data     raw little-endian array bytes (C order)
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

__all__ = ["CHECKPOINT_VERSION", "save_checkpoint", "load_checkpoint",
           "save_model", "load_model"]

CHECKPOINT_VERSION = 1
_MAGIC = b"RTCK"
_DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<f4")}
_DTYPE_CODES = {np.dtype("float64"): 0, np.dtype("float32"): 1}


def save_checkpoint(path, arrays: dict, meta: dict | None = None) -> None:
    meta_blob = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
    out = bytearray()
    out += _MAGIC
    out += struct.pack("<H", CHECKPOINT_VERSION)
    out += struct.pack("<I", len(meta_blob)) + meta_blob
    out += struct.pack("<I", len(arrays))
    for name in sorted(arrays):
        arr = np.asarray(arrays[name])
        if arr.dtype not in _DTYPE_CODES:
            arr = arr.astype(np.float64)
        blob = name.encode("utf-8")
        out += struct.pack("<H", len(blob)) + blob
        out += struct.pack("<BB", _DTYPE_CODES[arr.dtype], arr.ndim)
        out += struct.pack(f"<{arr.ndim}I", *arr.shape)
        out += arr.astype(arr.dtype.newbyteorder("<")).tobytes()
    Path(path).write_bytes(bytes(out))


def load_checkpoint(path) -> tuple[dict, dict]:
    """Returns (arrays, meta)."""
    data = Path(path).read_bytes()
    if data[:4] != _MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    version = struct.unpack_from("<H", data, 4)[0]
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    pos = 6
    meta_len = struct.unpack_from("<I", data, pos)[0]
    pos += 4
    meta = json.loads(data[pos:pos + meta_len].decode("utf-8")) if meta_len else {}
    pos += meta_len
    count = struct.unpack_from("<I", data, pos)[0]
    pos += 4
    arrays = {}
    for _ in range(count):
        name_len = struct.unpack_from("<H", data, pos)[0]
        pos += 2
        name = data[pos:pos + name_len].decode("utf-8")
        pos += name_len
        dtype_code, ndim = struct.unpack_from("<BB", data, pos)
        pos += 2
        shape = struct.unpack_from(f"<{ndim}I", data, pos)
        pos += 4 * ndim
        dtype = _DTYPES[dtype_code]
        nbytes = int(np.prod(shape)) * dtype.itemsize if ndim else dtype.itemsize
        arr = np.frombuffer(data[pos:pos + nbytes], dtype=dtype).reshape(shape)
        pos += nbytes
        arrays[name] = arr.copy()
    return arrays, meta


def save_model(path, model) -> None:
    """Persist a TrainedModel (parameters + architecture config)."""
    from dataclasses import asdict

    meta = {"config": asdict(model.cfg)}
    save_checkpoint(path, model.arrays(), meta)


def load_model(path):
    """Rebuild a TrainedModel from a checkpoint file."""
    from .pipeline import TrainConfig
    from .train import TrainedModel

    arrays, meta = load_checkpoint(path)
    cfg = TrainConfig(**meta.get("config", {}))
    model = TrainedModel(cfg)
    model.load_arrays(arrays)
    return model
