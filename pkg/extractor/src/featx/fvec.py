"""Writer for the FVEC binary feature container.

Layout, all little-endian:

    bytes 0..3   magic "FLD1"
    bytes 4..7   u32 row count n
    bytes 8..11  u32 dimension d
    byte  12     u8 dtype code (0 = 32-bit float)
    bytes 13..   n * d * 4 bytes of row-major float32 payload

This module only writes the format; evaluation tools own the reader.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataError

MAGIC = b"FLD1"
DTYPE_FLOAT32 = 0
_HEADER = struct.Struct("<4sIIB")


def write_fvec(features: np.ndarray, path) -> None:
    """Write a 2-D float feature array, narrowing the payload to float32."""
    array = np.asarray(features)
    if array.ndim != 2:
        raise DataError(f"features must be 2-D, got shape {array.shape}")
    n, d = array.shape
    if n < 1 or d < 1:
        raise DataError(f"features must be non-empty, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise DataError("features contain non-finite values")
    header = _HEADER.pack(MAGIC, n, d, DTYPE_FLOAT32)
    payload = np.ascontiguousarray(array, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)
