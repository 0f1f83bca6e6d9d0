"""Fixed-width bit packing for non-negative integer arrays.

Values are written MSB-first, back to back, with the final byte zero-padded.
Packing runs in byte-aligned chunks so large arrays never materialize a full
bit matrix.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, FormatError

_CHUNK = 1 << 17  # symbols per chunk; chunk * width is always a whole byte count


def width_for(max_value: int) -> int:
    """Smallest bit width that stores values in [0, max_value]."""
    if max_value < 0:
        raise DimensionError("bit width requires a non-negative maximum")
    return max(1, int(max_value).bit_length())


def packed_size(count: int, width: int) -> int:
    """Bytes needed for *count* values at *width* bits each."""
    return (count * width + 7) // 8


def pack_ints(values: np.ndarray, width: int) -> bytes:
    """Pack int64 values into a width-bit big-endian bit stream."""
    if not 1 <= width <= 63:
        raise DimensionError(f"bit width must be in [1, 63], got {width}")
    values = np.ascontiguousarray(values, dtype=np.int64)
    if len(values) and (values.min() < 0 or values.max() >> width):
        raise DimensionError(f"values do not fit in {width} bits")
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    parts = []
    for start in range(0, len(values), _CHUNK):
        sub = values[start : start + _CHUNK]
        bits = ((sub[:, None] >> shifts) & 1).astype(np.uint8)
        parts.append(np.packbits(bits.ravel()))
    if not parts:
        return b""
    return np.concatenate(parts).tobytes()


def unpack_ints(data: bytes, count: int, width: int) -> np.ndarray:
    """Inverse of :func:`pack_ints` for a known value count."""
    if not 1 <= width <= 63:
        raise DimensionError(f"bit width must be in [1, 63], got {width}")
    if len(data) < packed_size(count, width):
        raise FormatError("bit-packed payload is truncated")
    buf = np.frombuffer(data, dtype=np.uint8)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    out = np.empty(count, dtype=np.int64)
    for start in range(0, count, _CHUNK):
        stop = min(start + _CHUNK, count)
        first_byte = start * width // 8
        last_byte = (stop * width + 7) // 8
        bits = np.unpackbits(buf[first_byte:last_byte])[: (stop - start) * width]
        bits = bits.reshape(stop - start, width).astype(np.int64)
        out[start:stop] = (bits << shifts).sum(axis=1)
    return out
