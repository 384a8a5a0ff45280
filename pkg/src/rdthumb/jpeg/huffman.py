"""Baseline Huffman entropy coding of quantized coefficient grids.

DC terms are coded differentially per component; AC terms use the
run-length/size alphabet.  Code tables are the ITU-T T.81 Annex K
defaults.  The bit writer stuffs a 0x00 after every literal 0xFF byte and
the reader removes it.
"""

from __future__ import annotations

import numpy as np

from .blocks import CoeffKind, DctBlockGrid
from .tables import zigzag, unzigzag

__all__ = ["HuffmanTable", "BitWriter", "BitReader", "JpegError",
           "JpegEncodeError", "JpegDecodeError", "encode_scan", "decode_scan",
           "LUMA_DC", "LUMA_AC", "CHROMA_DC", "CHROMA_AC"]


class JpegError(Exception):
    pass


class JpegEncodeError(JpegError):
    pass


class JpegDecodeError(JpegError):
    """Raised on malformed scan data; carries the failing byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class HuffmanTable:
    """One T.81 Huffman table: encode map and incremental decode map."""

    def __init__(self, bits, values):
        bits = list(bits)
        values = list(values)
        if len(bits) != 16 or sum(bits) != len(values):
            raise ValueError("malformed Huffman specification")
        self.bits = bits
        self.values = values
        self.encode: dict[int, tuple[int, int]] = {}
        self.decode: dict[tuple[int, int], int] = {}
        code = 0
        k = 0
        for length in range(1, 17):
            for _ in range(bits[length - 1]):
                symbol = values[k]
                self.encode[symbol] = (code, length)
                self.decode[(length, code)] = symbol
                code += 1
                k += 1
            code <<= 1

    def spec_bytes(self) -> bytes:
        return bytes(self.bits) + bytes(self.values)


# T.81 Annex K default tables.
LUMA_DC = HuffmanTable(
    (0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0),
    range(12))

CHROMA_DC = HuffmanTable(
    (0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0),
    range(12))

LUMA_AC = HuffmanTable(
    (0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D),
    (0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
     0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
     0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72,
     0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
     0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
     0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
     0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75,
     0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
     0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3,
     0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
     0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9,
     0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
     0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4,
     0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA))

CHROMA_AC = HuffmanTable(
    (0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77),
    (0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41,
     0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
     0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0, 0x15, 0x62, 0x72, 0xD1,
     0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
     0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44,
     0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
     0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74,
     0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
     0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A,
     0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
     0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7,
     0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
     0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4,
     0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA))


class BitWriter:
    """MSB-first bit packer with 0xFF byte stuffing."""

    def __init__(self):
        self.buf = bytearray()
        self._acc = 0
        self._nbits = 0

    def write(self, code: int, length: int) -> None:
        if length == 0:
            return
        self._acc = (self._acc << length) | (code & ((1 << length) - 1))
        self._nbits += length
        while self._nbits >= 8:
            self._nbits -= 8
            byte = (self._acc >> self._nbits) & 0xFF
            self.buf.append(byte)
            if byte == 0xFF:
                self.buf.append(0x00)
        self._acc &= (1 << self._nbits) - 1

    def finish(self) -> bytes:
        if self._nbits:
            pad = 8 - self._nbits
            self.write((1 << pad) - 1, pad)
        return bytes(self.buf)


class BitReader:
    """MSB-first bit reader that undoes 0xFF00 stuffing.

    Reading past the end of the scan (into a marker or off the buffer)
    raises :class:`JpegDecodeError` with the byte offset.
    """

    def __init__(self, data: bytes, start: int = 0):
        self.data = data
        self.pos = start
        self._acc = 0
        self._nbits = 0

    def _load_byte(self) -> None:
        if self.pos >= len(self.data):
            raise JpegDecodeError("scan data truncated", self.pos)
        byte = self.data[self.pos]
        self.pos += 1
        if byte == 0xFF:
            if self.pos >= len(self.data):
                raise JpegDecodeError("scan data truncated after 0xFF", self.pos)
            marker = self.data[self.pos]
            if marker == 0x00:
                self.pos += 1
            else:
                raise JpegDecodeError(f"unexpected marker 0xFF{marker:02X} inside scan",
                                      self.pos - 1)
        self._acc = (self._acc << 8) | byte
        self._nbits += 8

    def read_bit(self) -> int:
        if self._nbits == 0:
            self._load_byte()
        self._nbits -= 1
        return (self._acc >> self._nbits) & 1

    def read_bits(self, n: int) -> int:
        value = 0
        for _ in range(n):
            value = (value << 1) | self.read_bit()
        return value

    def align_to_byte(self) -> None:
        self._nbits = 0
        self._acc = 0

    def decode_symbol(self, table: HuffmanTable) -> int:
        code = 0
        for length in range(1, 17):
            code = (code << 1) | self.read_bit()
            symbol = table.decode.get((length, code))
            if symbol is not None:
                return symbol
        raise JpegDecodeError("invalid Huffman code", self.pos)


def _category(value: int) -> int:
    return int(value).bit_length() if value >= 0 else int(-value).bit_length()


def _amplitude_bits(value: int, cat: int) -> int:
    return value if value >= 0 else value + (1 << cat) - 1


def _extend(bits: int, cat: int) -> int:
    if cat == 0:
        return 0
    return bits if bits >= (1 << (cat - 1)) else bits - (1 << cat) + 1


def _encode_block(writer: BitWriter, zz: list, pred: int,
                  dc_table: HuffmanTable, ac_table: HuffmanTable) -> int:
    dc = zz[0]
    diff = dc - pred
    cat = _category(diff)
    if cat > 11:
        raise JpegEncodeError(f"DC difference {diff} exceeds representable category 11")
    code, length = dc_table.encode[cat]
    writer.write(code, length)
    if cat:
        writer.write(_amplitude_bits(diff, cat), cat)

    run = 0
    for k in range(1, 64):
        v = zz[k]
        if v == 0:
            run += 1
            continue
        while run > 15:
            code, length = ac_table.encode[0xF0]     # ZRL: sixteen zeros
            writer.write(code, length)
            run -= 16
        cat = _category(v)
        if cat > 10:
            raise JpegEncodeError(f"AC coefficient {v} exceeds representable category 10")
        code, length = ac_table.encode[(run << 4) | cat]
        writer.write(code, length)
        writer.write(_amplitude_bits(v, cat), cat)
        run = 0
    if run:
        code, length = ac_table.encode[0x00]          # EOB
        writer.write(code, length)
    return dc


def encode_scan(grid: DctBlockGrid) -> bytes:
    """Interleaved (Y, Cb, Cr per block position) baseline scan."""
    if grid.kind is not CoeffKind.QUANTIZED:
        raise JpegEncodeError(f"entropy coding needs an integer-quantized grid, "
                              f"got {grid.kind.value}")
    writer = BitWriter()
    zz = [zigzag(ch).astype(np.int64) for ch in grid.channels()]
    tables = ((LUMA_DC, LUMA_AC), (CHROMA_DC, CHROMA_AC), (CHROMA_DC, CHROMA_AC))
    preds = [0, 0, 0]
    for n in range(grid.n_blocks):
        for c in range(3):
            preds[c] = _encode_block(writer, zz[c][n].tolist(), preds[c], *tables[c])
    return writer.finish()


def _decode_block(reader: BitReader, pred: int,
                  dc_table: HuffmanTable, ac_table: HuffmanTable):
    zz = [0] * 64
    cat = reader.decode_symbol(dc_table)
    diff = _extend(reader.read_bits(cat), cat) if cat else 0
    zz[0] = pred + diff
    k = 1
    while k < 64:
        rs = reader.decode_symbol(ac_table)
        run, size = rs >> 4, rs & 0x0F
        if size == 0:
            if run == 15:
                k += 16
                continue
            break                                      # EOB
        k += run
        if k > 63:
            raise JpegDecodeError(f"AC run overflows block (index {k})", reader.pos)
        zz[k] = _extend(reader.read_bits(size), size)
        k += 1
    return zz, zz[0]


def decode_scan(data: bytes, start: int, block_rows: int, block_cols: int) -> tuple:
    """Decode an interleaved 3-component scan; returns (grid, end_offset)."""
    reader = BitReader(data, start)
    n = block_rows * block_cols
    out = [np.zeros((n, 64), dtype=np.int64) for _ in range(3)]
    tables = ((LUMA_DC, LUMA_AC), (CHROMA_DC, CHROMA_AC), (CHROMA_DC, CHROMA_AC))
    preds = [0, 0, 0]
    for i in range(n):
        for c in range(3):
            zz, preds[c] = _decode_block(reader, preds[c], *tables[c])
            out[c][i] = zz
    grid = DctBlockGrid(unzigzag(out[0]).astype(np.float64),
                        unzigzag(out[1]).astype(np.float64),
                        unzigzag(out[2]).astype(np.float64),
                        block_rows, block_cols, CoeffKind.QUANTIZED)
    return grid, reader.pos
