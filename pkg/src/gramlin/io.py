"""Dense-matrix file readers and writers: Matrix Market, CSV, raw binary.

The ``bin`` format is self-describing: u64 row count, u64 column count, then
row-major float64 data, all little-endian.  Text formats are written with
enough digits to round-trip float64 exactly.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .errors import FormatError, IngestError

FORMATS = ("mtx", "csv", "bin")
_BIN_HEADER = struct.Struct("<QQ")


def detect_format(path: str | Path, fmt: str | None = None) -> str:
    """Use the explicit format if given, else the file suffix."""
    if fmt:
        fmt = fmt.lower()
        if fmt not in FORMATS:
            raise FormatError(f"unknown matrix format {fmt!r}; expected {FORMATS}")
        return fmt
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix in FORMATS:
        return suffix
    raise FormatError(
        f"cannot infer format from {Path(path).name!r}; pass one of {FORMATS}"
    )


def _check_dense(dense: np.ndarray, source: str | Path) -> np.ndarray:
    dense = np.ascontiguousarray(dense, dtype=np.float64)
    if dense.ndim == 1:
        dense = dense.reshape(1, -1)
    if dense.ndim != 2:
        raise IngestError(f"{source}: expected a 2-D matrix, got ndim={dense.ndim}")
    if np.isnan(dense).any():
        raise IngestError(f"{source}: matrix contains NaN entries")
    return dense


def read_matrix(path: str | Path, fmt: str | None = None) -> np.ndarray:
    """Load a dense float64 matrix from mtx, csv, or bin."""
    fmt = detect_format(path, fmt)
    path = Path(path)
    try:
        if fmt == "mtx":
            loaded = scipy.io.mmread(path)
            dense = loaded.toarray() if scipy.sparse.issparse(loaded) else np.asarray(loaded)
        elif fmt == "csv":
            dense = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
        else:
            raw = path.read_bytes()
            if len(raw) < _BIN_HEADER.size:
                raise FormatError(f"{path}: binary matrix header is truncated")
            n_rows, n_cols = _BIN_HEADER.unpack_from(raw)
            need = _BIN_HEADER.size + 8 * n_rows * n_cols
            if len(raw) != need:
                raise FormatError(
                    f"{path}: expected {need} bytes for a {n_rows}x{n_cols} matrix, "
                    f"got {len(raw)}"
                )
            dense = np.frombuffer(raw, dtype="<f8", offset=_BIN_HEADER.size)
            dense = dense.reshape(n_rows, n_cols)
    except (FormatError, IngestError):
        raise
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return _check_dense(dense, path)


def write_matrix(path: str | Path, matrix: np.ndarray, fmt: str | None = None) -> None:
    """Write a dense matrix as mtx, csv, or bin (float64-exact in all three)."""
    fmt = detect_format(path, fmt)
    path = Path(path)
    dense = _check_dense(matrix, path)
    if fmt == "mtx":
        scipy.io.mmwrite(path, scipy.sparse.coo_matrix(dense), precision=17)
    elif fmt == "csv":
        np.savetxt(path, dense, delimiter=",", fmt="%.17g")
    else:
        with open(path, "wb") as fh:
            fh.write(_BIN_HEADER.pack(dense.shape[0], dense.shape[1]))
            fh.write(dense.astype("<f8").tobytes())
