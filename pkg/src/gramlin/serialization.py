"""Container format for compressed matrices.

Layout (all little-endian)::

    magic   4 bytes  b"GRLM"
    version u8       currently 1
    variant u8       0=csrv 1=re_32 2=re_iv 3=re_ans
    n_rows  u64
    n_cols  u64
    blocks  u32      block count
    n_vals  u64      dictionary size
    values  f64 * n_vals            (always uncompressed)
    offsets u64 * blocks            absolute offset of each block payload
    payloads ...

Block payloads by variant:

* ``csrv``   -- u64 code count, then u32 codes of the raw pair sequence.
* ``re_32``  -- u64 final count, u64 rule count, u32 final codes, u32 rule
  codes (two per rule).
* ``re_iv``  -- u64 final count, u64 rule count, u8 width, then final and rule
  codes bit-packed at exactly ``width = 1 + floor(log2(max_code))`` bits.
* ``re_ans`` -- u64 final count, u64 rule count, u8 rule width, u8 scale bits,
  u32 table length, (u32 symbol, u32 freq) table, u32 end state, u64 stream
  length, the entropy-coded final sequence, then rules bit-packed as in
  ``re_iv``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .bitpack import pack_ints, packed_size, unpack_ints, width_for
from .blocking import BlockedMatrix
from .csrv import CsrvMatrix
from .errors import DimensionError, FormatError
from .grammar import Grammar
from .rans import RansModel, build_model, decode, encode

MAGIC = b"GRLM"
VERSION = 1

VARIANTS = ("csrv", "re_32", "re_iv", "re_ans")
_HEADER = struct.Struct("<4sBBQQIQ")
_U32_MAX = (1 << 32) - 1


def normalize_variant(name: str) -> str:
    """Map spelling variants like ``re32``/``reiv``/``reans`` to canonical names."""
    key = name.strip().lower().replace("-", "_")
    if key in VARIANTS:
        return key
    compact = {v.replace("_", ""): v for v in VARIANTS}
    if key in compact:
        return compact[key]
    raise FormatError(f"unknown variant {name!r}; expected one of {', '.join(VARIANTS)}")


def _u32_codes(arr: np.ndarray, what: str) -> np.ndarray:
    if len(arr) and (arr.min() < 0 or arr.max() > _U32_MAX):
        raise FormatError(f"{what} codes do not fit in 32 bits")
    return arr.astype(np.uint32)


def _encode_csrv_block(blk: CsrvMatrix) -> bytes:
    return struct.pack("<Q", len(blk.codes)) + _u32_codes(blk.codes, "sequence").tobytes()


def _encode_re32_block(g: Grammar) -> bytes:
    head = struct.pack("<QQ", len(g.final), g.n_rules)
    return (
        head
        + _u32_codes(g.final, "final").tobytes()
        + _u32_codes(g.rules.reshape(-1), "rule").tobytes()
    )


def _grammar_width(g: Grammar) -> int:
    max_code = 0
    if len(g.final):
        max_code = int(g.final.max())
    if g.n_rules:
        max_code = max(max_code, int(g.rules.max()))
    return width_for(max_code)


def _encode_reiv_block(g: Grammar) -> bytes:
    width = _grammar_width(g)
    head = struct.pack("<QQB", len(g.final), g.n_rules, width)
    return head + pack_ints(g.final, width) + pack_ints(g.rules.reshape(-1), width)


def _encode_reans_block(g: Grammar) -> bytes:
    rule_codes = g.rules.reshape(-1)
    r_width = width_for(int(rule_codes.max()) if len(rule_codes) else 0)
    model = build_model(g.final)
    stream, state = encode(g.final, model)
    if len(model.symbols) and (model.symbols.max() > _U32_MAX or model.freqs.max() > _U32_MAX):
        raise FormatError("entropy table entries do not fit in 32 bits")
    table = np.empty(2 * len(model.symbols), dtype=np.uint32)
    table[0::2] = model.symbols.astype(np.uint32)
    table[1::2] = model.freqs.astype(np.uint32)
    head = struct.pack(
        "<QQBBI", len(g.final), g.n_rules, r_width, model.scale_bits, len(model.symbols)
    )
    tail = struct.pack("<IQ", state, len(stream))
    return head + table.tobytes() + tail + stream + pack_ints(rule_codes, r_width)


class _Reader:
    """Bounds-checked little-endian cursor over one byte buffer."""

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.data):
            raise FormatError("container is truncated")
        out = self.data[self.pos : self.pos + count]
        self.pos += count
        return out

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))

    def array(self, dtype: str, count: int) -> np.ndarray:
        item = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(count * item), dtype=dtype)


_QQ = struct.Struct("<QQ")
_QQB = struct.Struct("<QQB")
_QQBBI = struct.Struct("<QQBBI")
_IQ = struct.Struct("<IQ")


def _decode_csrv_block(r: _Reader, values: np.ndarray, n_cols: int) -> CsrvMatrix:
    (n_codes,) = struct.unpack("<Q", r.take(8))
    codes = r.array("<u4", n_codes).astype(np.int64)
    n_rows = int(np.count_nonzero(codes == 0))
    return CsrvMatrix(n_rows=n_rows, n_cols=n_cols, values=values, codes=codes)


def _grammar_from(values, n_cols, final, rules) -> Grammar:
    n_rows = int(np.count_nonzero(final == 0))
    return Grammar(
        n_rows=n_rows, n_cols=n_cols, values=values, rules=rules, final=final
    )


def _decode_re32_block(r: _Reader, values: np.ndarray, n_cols: int) -> Grammar:
    n_final, n_rules = r.unpack(_QQ)
    final = r.array("<u4", n_final).astype(np.int64)
    rules = r.array("<u4", 2 * n_rules).astype(np.int64).reshape(n_rules, 2)
    return _grammar_from(values, n_cols, final, rules)


def _decode_reiv_block(r: _Reader, values: np.ndarray, n_cols: int) -> Grammar:
    n_final, n_rules, width = r.unpack(_QQB)
    final = unpack_ints(r.take(packed_size(n_final, width)), n_final, width)
    rules = unpack_ints(
        r.take(packed_size(2 * n_rules, width)), 2 * n_rules, width
    ).reshape(n_rules, 2)
    return _grammar_from(values, n_cols, final, rules)


def _decode_reans_block(r: _Reader, values: np.ndarray, n_cols: int) -> Grammar:
    n_final, n_rules, r_width, scale_bits, table_len = r.unpack(_QQBBI)
    table = r.array("<u4", 2 * table_len)
    state, stream_len = r.unpack(_IQ)
    stream = r.take(stream_len)
    rules = unpack_ints(
        r.take(packed_size(2 * n_rules, r_width)), 2 * n_rules, r_width
    ).reshape(n_rules, 2)
    if table_len == 0:
        if n_final:
            raise FormatError("entropy table is empty but the final sequence is not")
        final = np.zeros(0, dtype=np.int64)
    else:
        model = RansModel(
            symbols=table[0::2].astype(np.int64),
            freqs=table[1::2].astype(np.int64),
            scale_bits=scale_bits,
        )
        if int(model.freqs.sum()) != 1 << scale_bits:
            raise FormatError("entropy table frequencies are inconsistent")
        final = decode(stream, state, model, n_final)
    return _grammar_from(values, n_cols, final, rules)


_BLOCK_CODECS = {
    "csrv": (_encode_csrv_block, _decode_csrv_block, CsrvMatrix),
    "re_32": (_encode_re32_block, _decode_re32_block, Grammar),
    "re_iv": (_encode_reiv_block, _decode_reiv_block, Grammar),
    "re_ans": (_encode_reans_block, _decode_reans_block, Grammar),
}


def payload_bytes(block: Grammar | CsrvMatrix, variant: str) -> int:
    """Serialized payload size of one block under a variant (no container)."""
    variant = normalize_variant(variant)
    encode_block, _, block_type = _BLOCK_CODECS[variant]
    if not isinstance(block, block_type):
        raise DimensionError(
            f"variant {variant} stores {block_type.__name__} blocks, "
            f"got {type(block).__name__}"
        )
    return len(encode_block(block))


def serialize(obj: Grammar | CsrvMatrix | BlockedMatrix, variant: str) -> bytes:
    """Wrap a compressed matrix (or its blocked form) into one container."""
    variant = normalize_variant(variant)
    encode_block, _, block_type = _BLOCK_CODECS[variant]
    if isinstance(obj, BlockedMatrix):
        blocks: tuple = obj.blocks
        n_rows, n_cols, values = obj.n_rows, obj.n_cols, obj.values
    else:
        blocks = (obj,)
        n_rows, n_cols, values = obj.n_rows, obj.n_cols, obj.values
    for blk in blocks:
        if not isinstance(blk, block_type):
            raise DimensionError(
                f"variant {variant} stores {block_type.__name__} blocks, "
                f"got {type(blk).__name__}"
            )
    payloads = [encode_block(blk) for blk in blocks]
    header = _HEADER.pack(
        MAGIC, VERSION, VARIANTS.index(variant), n_rows, n_cols, len(blocks), len(values)
    )
    prefix = len(header) + 8 * len(values) + 8 * len(blocks)
    offsets = np.empty(len(blocks), dtype=np.uint64)
    pos = prefix
    for i, payload in enumerate(payloads):
        offsets[i] = pos
        pos += len(payload)
    parts = [header, np.ascontiguousarray(values).tobytes(), offsets.tobytes()]
    parts.extend(payloads)
    return b"".join(parts)


def _parse_header(r: _Reader):
    magic, version, variant_tag, n_rows, n_cols, n_blocks, n_values = r.unpack(_HEADER)
    if magic != MAGIC:
        raise FormatError("not a GRLM container (bad magic)")
    if version != VERSION:
        raise FormatError(f"unsupported container version {version}")
    if variant_tag >= len(VARIANTS):
        raise FormatError(f"unknown variant tag {variant_tag}")
    if n_blocks < 1:
        raise FormatError("container declares zero blocks")
    variant = VARIANTS[variant_tag]
    values = r.array("<f8", n_values).astype(np.float64)
    offsets = r.array("<u8", n_blocks)
    return variant, n_rows, n_cols, values, offsets


def deserialize(data: bytes) -> Grammar | CsrvMatrix | BlockedMatrix:
    """Parse a container; single-block containers return the bare block."""
    r = _Reader(data)
    variant, n_rows, n_cols, values, offsets = _parse_header(r)
    _, decode_block, _ = _BLOCK_CODECS[variant]
    blocks = []
    for off in offsets:
        if off > len(data):
            raise FormatError("block offset beyond the container end")
        r.pos = int(off)
        blocks.append(decode_block(r, values, int(n_cols)))
    total_rows = sum(b.n_rows for b in blocks)
    if total_rows != n_rows:
        raise FormatError(
            f"blocks contain {total_rows} rows, header declares {n_rows}"
        )
    if len(blocks) == 1:
        return blocks[0]
    return BlockedMatrix(
        n_rows=int(n_rows), n_cols=int(n_cols), values=values, blocks=tuple(blocks)
    )


@dataclass(frozen=True)
class SizeReport:
    """Byte accounting of one container."""

    variant: str
    n_rows: int
    n_cols: int
    n_blocks: int
    n_values: int
    total_bytes: int
    values_bytes: int
    payload_bytes: int
    dense_bytes: int
    ratio: float  # total bytes relative to the dense float64 matrix
    block_payload_bytes: tuple[int, ...]
    block_code_counts: tuple[int, ...]

    def as_dict(self) -> dict:
        out = dict(vars(self))
        out["block_payload_bytes"] = list(self.block_payload_bytes)
        out["block_code_counts"] = list(self.block_code_counts)
        return out


def _block_code_count(variant: str, r: _Reader) -> int:
    """Stored symbol-code count of one block (|final| + 2 |rules|, or |S|)."""
    if variant == "csrv":
        (n_codes,) = struct.unpack("<Q", r.take(8))
        return int(n_codes)
    if variant in ("re_32", "re_iv"):
        n_final, n_rules = _QQ.unpack(r.take(_QQ.size))
        return int(n_final + 2 * n_rules)
    n_final, n_rules = _QQ.unpack(r.take(_QQ.size))
    return int(n_final + 2 * n_rules)


def size_report(data: bytes) -> SizeReport:
    """Summarize a serialized container without fully decoding it."""
    r = _Reader(data)
    variant, n_rows, n_cols, values, offsets = _parse_header(r)
    bounds = [int(o) for o in offsets] + [len(data)]
    per_block = []
    code_counts = []
    for i in range(len(offsets)):
        if bounds[i + 1] < bounds[i]:
            raise FormatError("block offsets are not ascending")
        per_block.append(bounds[i + 1] - bounds[i])
        r.pos = bounds[i]
        code_counts.append(_block_code_count(variant, r))
    dense = int(n_rows) * int(n_cols) * 8
    return SizeReport(
        variant=variant,
        n_rows=int(n_rows),
        n_cols=int(n_cols),
        n_blocks=len(offsets),
        n_values=len(values),
        total_bytes=len(data),
        values_bytes=8 * len(values),
        payload_bytes=sum(per_block),
        dense_bytes=dense,
        ratio=len(data) / dense if dense else float("inf"),
        block_payload_bytes=tuple(per_block),
        block_code_counts=tuple(code_counts),
    )
