"""rdthumb: rate-distortion-aware image rescaling into JPEG thumbnails.

A high-resolution image is embedded into a standard-decodable JPEG
thumbnail by a learned encoder with image-adaptive quantization tables;
a frequency-aware decoder reconstructs the high-resolution image from
the thumbnail's pixels and its DCT coefficients.
"""

__version__ = "0.1.0"

import os as _os

# Honor the thread-count knob before numpy spins up its BLAS pools.
if "RDTHUMB_THREADS" in _os.environ:
    _os.environ.setdefault("OMP_NUM_THREADS", _os.environ["RDTHUMB_THREADS"])
    _os.environ.setdefault("OPENBLAS_NUM_THREADS", _os.environ["RDTHUMB_THREADS"])
    _os.environ.setdefault("MKL_NUM_THREADS", _os.environ["RDTHUMB_THREADS"])

from .planar import ColorSpace, PlanarImage, ValueRange, crop, pad_to_blocks

__all__ = ["ColorSpace", "PlanarImage", "ValueRange", "crop", "pad_to_blocks",
           "__version__"]
