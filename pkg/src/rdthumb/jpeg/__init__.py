"""Baseline JPEG codec that exposes tables and DCT coefficients."""

from .blocks import (CoeffKind, DctBlockGrid, grid_to_ycbcr_planes,
                     image_to_raw_grid, merge_blocks, split_blocks)
from .codec import (JpegBytes, JpegDecodeResult, UnsupportedJpegError,
                    jpeg_decode, jpeg_encode)
from .color import rgb_to_ycbcr, ycbcr_to_rgb
from .dct import DCT_BASIS, fdct8x8, idct8x8
from .huffman import JpegDecodeError, JpegEncodeError, JpegError
from .quantize import (AC_LIMIT, DC_LIMIT, dequantize, dequantize_soft,
                       quantize_hard, quantize_soft, quantize_soft_grid)
from .tables import (ANNEX_K_CHROMA, ANNEX_K_LUMA, ZIGZAG_ORDER, QuantTableSet,
                     TableForm, annex_k_tables, integerize_tables,
                     quality_scale, round_half_away, unzigzag, zigzag)

__all__ = [
    "CoeffKind", "DctBlockGrid", "grid_to_ycbcr_planes", "image_to_raw_grid",
    "merge_blocks", "split_blocks",
    "JpegBytes", "JpegDecodeResult", "UnsupportedJpegError", "jpeg_decode",
    "jpeg_encode",
    "rgb_to_ycbcr", "ycbcr_to_rgb",
    "DCT_BASIS", "fdct8x8", "idct8x8",
    "JpegDecodeError", "JpegEncodeError", "JpegError",
    "AC_LIMIT", "DC_LIMIT", "dequantize", "dequantize_soft", "quantize_hard",
    "quantize_soft", "quantize_soft_grid",
    "ANNEX_K_CHROMA", "ANNEX_K_LUMA", "ZIGZAG_ORDER", "QuantTableSet",
    "TableForm", "annex_k_tables", "integerize_tables", "quality_scale",
    "round_half_away", "unzigzag", "zigzag",
]
