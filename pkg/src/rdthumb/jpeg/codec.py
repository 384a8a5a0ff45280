"""Baseline sequential JFIF container: marker layout, encode, decode.

Files produced here are 4:4:4 (no chroma subsampling), 8-bit, with the
Annex-K default Huffman tables and the caller's quantization tables in
two DQT segments.  The decoder additionally surfaces the dequantized DCT
coefficients and the tables so downstream consumers need no re-transform.

Marker layout of an encoded file (in order):
  SOI, APP0 "JFIF", DQT (luma), DQT (chroma), SOF0 (3 components, 1x1
  sampling), DHT x4 (luma DC/AC, chroma DC/AC), SOS, entropy-coded scan,
  EOI.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..planar import ColorSpace, PlanarImage, ValueRange, crop, pad_to_blocks
from .blocks import CoeffKind, DctBlockGrid, image_to_raw_grid, merge_blocks
from .huffman import (CHROMA_AC, CHROMA_DC, LUMA_AC, LUMA_DC, JpegDecodeError,
                      JpegError, HuffmanTable, decode_scan, encode_scan)
from .islow import idct8x8_islow, ycc_to_rgb_fixed
from .quantize import dequantize, quantize_hard
from .tables import QuantTableSet, TableForm, zigzag, unzigzag

__all__ = ["JpegBytes", "JpegDecodeResult", "UnsupportedJpegError",
           "jpeg_encode", "jpeg_decode"]

_SOI, _EOI, _SOS, _DQT, _DHT, _SOF0, _APP0, _COM = (
    0xD8, 0xD9, 0xDA, 0xDB, 0xC4, 0xC0, 0xE0, 0xFE)

_UNSUPPORTED_SOF = {0xC1, 0xC2, 0xC3, 0xC5, 0xC6, 0xC7,
                    0xC9, 0xCA, 0xCB, 0xCD, 0xCE, 0xCF}


class UnsupportedJpegError(JpegError):
    """The stream is valid JPEG but uses features outside baseline 4:4:4."""


@dataclass
class JpegBytes:
    """An encoded JPEG file plus its pixel dimensions."""

    data: bytes
    height: int
    width: int

    def __post_init__(self):
        if len(self.data) < 4 or self.data[:2] != b"\xFF\xD8" or self.data[-2:] != b"\xFF\xD9":
            raise ValueError("JPEG payload must start with SOI and end with EOI")

    def __len__(self) -> int:
        return len(self.data)


@dataclass
class JpegDecodeResult:
    pixels: PlanarImage               # RGB, byte range, cropped to SOF dims
    coefficients: DctBlockGrid        # dequantized (C^), padded block grid
    quantized: DctBlockGrid           # integer-quantized ([C~])
    tables: QuantTableSet


def _segment(marker: int, payload: bytes) -> bytes:
    return struct.pack(">BBH", 0xFF, marker, len(payload) + 2) + payload


def _app0_jfif() -> bytes:
    return _segment(_APP0, b"JFIF\x00" + bytes((1, 1, 0)) +
                    struct.pack(">HH", 1, 1) + bytes((0, 0)))


def _dqt(table: np.ndarray, table_id: int) -> bytes:
    vals = zigzag(table).astype(np.uint8)
    return _segment(_DQT, bytes([table_id]) + vals.tobytes())


def _sof0(height: int, width: int) -> bytes:
    payload = struct.pack(">BHHB", 8, height, width, 3)
    for cid, tq in ((1, 0), (2, 1), (3, 1)):
        payload += bytes((cid, 0x11, tq))
    return _segment(_SOF0, payload)


def _dht(table: HuffmanTable, table_class: int, table_id: int) -> bytes:
    return _segment(_DHT, bytes([(table_class << 4) | table_id]) + table.spec_bytes())


def _sos() -> bytes:
    payload = bytes([3])
    for cid, td_ta in ((1, 0x00), (2, 0x11), (3, 0x11)):
        payload += bytes((cid, td_ta))
    payload += bytes((0, 63, 0))
    return _segment(_SOS, payload)


def jpeg_encode(img: PlanarImage, q: QuantTableSet) -> JpegBytes:
    """Encode an RGB image with the given integer tables.

    Images with dimensions not divisible by 8 are padded internally by
    edge replication; the true dimensions go into SOF0 and the decoder
    crops back to them.
    """
    if img.space is not ColorSpace.RGB:
        raise ValueError(f"jpeg_encode expects an RGB image, got {img.space}")
    if q.form is not TableForm.INTEGER:
        raise ValueError("jpeg_encode requires integer-form tables")
    img = img.to_byte_range()
    height, width = img.height, img.width
    if height > 0xFFFF or width > 0xFFFF:
        raise ValueError(f"image dims {(height, width)} exceed the 16-bit JFIF limit")

    grid = image_to_raw_grid(pad_to_blocks(img))
    quant = quantize_hard(grid, q)
    scan = encode_scan(quant)

    out = bytearray(b"\xFF\xD8")
    out += _app0_jfif()
    out += _dqt(q.q_luma, 0)
    out += _dqt(q.q_chroma, 1)
    out += _sof0(height, width)
    out += _dht(LUMA_DC, 0, 0)
    out += _dht(LUMA_AC, 1, 0)
    out += _dht(CHROMA_DC, 0, 1)
    out += _dht(CHROMA_AC, 1, 1)
    out += _sos()
    out += scan
    out += b"\xFF\xD9"
    return JpegBytes(bytes(out), height, width)


class _Parser:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def u8(self) -> int:
        if self.pos >= len(self.data):
            raise JpegDecodeError("unexpected end of file", self.pos)
        v = self.data[self.pos]
        self.pos += 1
        return v

    def u16(self) -> int:
        return (self.u8() << 8) | self.u8()

    def marker(self) -> int:
        b = self.u8()
        if b != 0xFF:
            raise JpegDecodeError(f"expected marker, found byte 0x{b:02X}", self.pos - 1)
        m = self.u8()
        while m == 0xFF:                       # fill bytes are legal
            m = self.u8()
        return m


def jpeg_decode(jpeg) -> JpegDecodeResult:
    """Decode a baseline 4:4:4 JFIF stream.

    Returns pixels, the dequantized coefficient grid, the raw quantized
    grid, and the quantization tables.  Progressive scans, chroma
    subsampling, restart intervals, and arithmetic coding raise
    :class:`UnsupportedJpegError`.
    """
    data = jpeg.data if isinstance(jpeg, JpegBytes) else bytes(jpeg)
    p = _Parser(data)
    if p.marker() != _SOI:
        raise JpegDecodeError("missing SOI marker", 0)

    qtables: dict[int, np.ndarray] = {}
    comps: list[tuple[int, int]] = []        # (component id, table id)
    height = width = None

    while True:
        marker = p.marker()
        if marker in _UNSUPPORTED_SOF:
            raise UnsupportedJpegError(f"unsupported SOF marker 0xFF{marker:02X} "
                                       "(only baseline sequential is handled)")
        if marker == 0xDD:
            raise UnsupportedJpegError("restart intervals are not supported")
        if marker == 0xCC:
            raise UnsupportedJpegError("arithmetic coding is not supported")
        if marker == _SOS:
            break
        length = p.u16() - 2
        if length < 0 or p.pos + length > len(data):
            raise JpegDecodeError("segment length overruns file", p.pos)
        body = data[p.pos:p.pos + length]
        p.pos += length

        if marker == _DQT:
            i = 0
            while i < len(body):
                pq, tq = body[i] >> 4, body[i] & 0x0F
                if pq != 0:
                    raise UnsupportedJpegError("16-bit quantization tables not supported")
                vals = np.frombuffer(body[i + 1:i + 65], dtype=np.uint8)
                if vals.size != 64:
                    raise JpegDecodeError("truncated DQT segment", p.pos)
                qtables[tq] = unzigzag(vals.astype(np.float64))
                i += 65
        elif marker == _SOF0:
            if body[0] != 8:
                raise UnsupportedJpegError(f"{body[0]}-bit precision not supported")
            height, width = struct.unpack(">HH", body[1:5])
            ncomp = body[5]
            if ncomp != 3:
                raise UnsupportedJpegError(f"{ncomp}-component images not supported")
            for c in range(3):
                cid, sampling, tq = body[6 + 3 * c:9 + 3 * c]
                if sampling != 0x11:
                    raise UnsupportedJpegError("chroma subsampling not supported (4:4:4 only)")
                comps.append((cid, tq))
        # APPn / COM / other tables are skipped; the Annex-K Huffman
        # tables are fixed in this codec so DHT bodies need no parsing.

    if height is None:
        raise JpegDecodeError("SOS before SOF0", p.pos)
    if 0 not in qtables or 1 not in qtables:
        raise JpegDecodeError("missing quantization tables", p.pos)

    sos_len = p.u16() - 2
    p.pos += sos_len                          # component/table mapping is fixed here

    block_rows = (height + 7) // 8
    block_cols = (width + 7) // 8
    quant, end = decode_scan(data, p.pos, block_rows, block_cols)
    p.pos = end
    if p.marker() != _EOI:
        raise JpegDecodeError("missing EOI after scan", p.pos)

    tables = QuantTableSet(qtables[0], qtables[1], TableForm.INTEGER)
    deq = dequantize(quant, tables)
    # Pixel reconstruction follows the stock-decoder integer path so our
    # samples agree with third-party decoders to the last level.
    planes = [merge_blocks(idct8x8_islow(ch.astype(np.int64)), block_rows, block_cols)
              for ch in deq.channels()]
    rgb_bytes = ycc_to_rgb_fixed(planes[0], planes[1], planes[2])
    rgb = PlanarImage(rgb_bytes.astype(np.float64), ColorSpace.RGB, ValueRange.BYTE)
    rgb = crop(rgb, height, width)
    return JpegDecodeResult(rgb, deq, quant, tables)
