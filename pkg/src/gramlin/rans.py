"""Static table-driven range asymmetric numeral system coder.

One frequency table is built per message, normalized to ``1 << scale_bits``
with every symbol kept at frequency >= 1.  The encoder walks the message in
reverse and renormalizes byte by byte into the tail of a scratch buffer, so the
emitted stream decodes with a plain forward scan.  The 32-bit end state is
stored next to the stream; together with the table it reproduces the message
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import jit
from .errors import DimensionError, FormatError

RANS_L = 1 << 23  # lower bound of the normalized state interval
MIN_SCALE_BITS = 12


@dataclass(frozen=True)
class RansModel:
    """Normalized frequency table over the message's distinct symbols."""

    symbols: np.ndarray  # int64, ascending
    freqs: np.ndarray  # int64, each >= 1, summing to 1 << scale_bits
    scale_bits: int

    def __post_init__(self) -> None:
        self.symbols.flags.writeable = False
        self.freqs.flags.writeable = False


def normalize_freqs(counts: np.ndarray, scale_bits: int) -> np.ndarray:
    """Scale positive counts to sum to ``1 << scale_bits``, keeping each >= 1.

    Deterministic: floor-scale, clamp to 1, then repair the remainder against
    the largest entries (ties toward the lower index).
    """
    counts = np.asarray(counts, dtype=np.int64)
    if np.any(counts <= 0):
        raise DimensionError("frequency counts must be positive")
    target = 1 << scale_bits
    if len(counts) > target:
        raise DimensionError("alphabet larger than the frequency table size")
    total = counts.sum()
    scaled = counts * target // total
    frac = counts * target % total
    freqs = np.maximum(1, scaled)
    diff = target - int(freqs.sum())
    if diff > 0:
        # Flooring lost < 1 slot per symbol; top up the largest remainders.
        order = np.argsort(-frac, kind="stable")
        freqs[order[:diff]] += 1
    elif diff < 0:
        # Clamping overshot; drain the largest entries down toward 1.
        order = np.argsort(-freqs, kind="stable")
        cap = freqs[order] - 1
        before = np.concatenate(([0], np.cumsum(cap)[:-1]))
        take = np.clip(-diff - before, 0, cap)
        freqs[order] -= take
    return freqs


@jit
def _encode_kernel(indices, freqs, cums, scale_bits, buf):
    x = RANS_L
    pos = buf.shape[0]
    for k in range(indices.shape[0] - 1, -1, -1):
        s = indices[k]
        f = freqs[s]
        x_max = ((RANS_L >> scale_bits) << 8) * f
        while x >= x_max:
            pos -= 1
            buf[pos] = x & 0xFF
            x >>= 8
        x = ((x // f) << scale_bits) + (x % f) + cums[s]
    return pos, x


@jit
def _decode_kernel(stream, state, slot_to_index, freqs, cums, scale_bits, out):
    mask = (1 << scale_bits) - 1
    x = state
    pos = 0
    n = stream.shape[0]
    for k in range(out.shape[0]):
        slot = x & mask
        s = slot_to_index[slot]
        out[k] = s
        x = freqs[s] * (x >> scale_bits) + slot - cums[s]
        while x < RANS_L:
            if pos >= n:
                return -1, x
            x = (x << 8) | stream[pos]
            pos += 1
    return pos, x


def build_model(message: np.ndarray) -> RansModel:
    """Frequency model of a message (int64 symbols)."""
    message = np.ascontiguousarray(message, dtype=np.int64)
    symbols, counts = np.unique(message, return_counts=True)
    scale_bits = MIN_SCALE_BITS
    while (1 << scale_bits) < 2 * max(1, len(symbols)):
        scale_bits += 1
    freqs = normalize_freqs(counts, scale_bits) if len(symbols) else counts
    return RansModel(symbols=symbols, freqs=freqs, scale_bits=scale_bits)


def encode(message: np.ndarray, model: RansModel) -> tuple[bytes, int]:
    """Encode a message under its model; return (stream, end_state)."""
    message = np.ascontiguousarray(message, dtype=np.int64)
    if len(message) == 0:
        return b"", RANS_L
    indices = np.searchsorted(model.symbols, message)
    clipped = np.minimum(indices, len(model.symbols) - 1)
    if np.any(model.symbols[clipped] != message):
        raise DimensionError("message contains symbols outside the model")
    indices = clipped
    cums = np.zeros(len(model.freqs), dtype=np.int64)
    np.cumsum(model.freqs[:-1], out=cums[1:])
    buf = np.empty(8 * len(message) + 16, dtype=np.uint8)
    pos, state = _encode_kernel(
        indices.astype(np.int64), model.freqs, cums, model.scale_bits, buf
    )
    return buf[pos:].tobytes(), int(state)


def decode(stream: bytes, state: int, model: RansModel, count: int) -> np.ndarray:
    """Decode *count* symbols from a stream produced by :func:`encode`."""
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    if not RANS_L <= state < RANS_L << 8:
        raise FormatError("entropy-coder end state out of range")
    cums = np.zeros(len(model.freqs), dtype=np.int64)
    np.cumsum(model.freqs[:-1], out=cums[1:])
    total = 1 << model.scale_bits
    slot_to_index = np.repeat(
        np.arange(len(model.freqs), dtype=np.int64), model.freqs
    )
    if len(slot_to_index) != total:
        raise FormatError("frequency table does not sum to the slot count")
    data = np.frombuffer(stream, dtype=np.uint8)
    out = np.empty(count, dtype=np.int64)
    consumed, end = _decode_kernel(
        data, state, slot_to_index, model.freqs, cums, model.scale_bits, out
    )
    if consumed != len(data) or end != RANS_L:
        raise FormatError("entropy-coded stream is corrupt or truncated")
    return model.symbols[out]
