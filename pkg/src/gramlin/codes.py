"""Integer codes for sequence symbols.

A symbol sequence over a value dictionary of size ``n_values`` and a column
count ``n_cols`` is stored as an int64 array using a dense injective code:

* ``0`` -- row delimiter
* ``1 + value_index * n_cols + column`` -- a (value, column) pair
* ``1 + n_values * n_cols + rule_id`` -- grammar nonterminal ``rule_id``

``1 + n_values * n_cols`` is called the nonterminal *base*; codes below it are
terminals, codes at or above it index grammar rules.
"""

from __future__ import annotations

from dataclasses import dataclass

DELIMITER_CODE = 0


@dataclass(frozen=True)
class Pair:
    """A matrix entry: dictionary index of its value plus its column."""

    value_index: int
    column: int


@dataclass(frozen=True)
class RowDelimiter:
    """Marks the end of a matrix row inside a symbol sequence."""


@dataclass(frozen=True)
class Nonterminal:
    """Reference to a grammar rule by id."""

    rule_id: int


ROW_DELIMITER = RowDelimiter()


def nonterminal_base(n_values: int, n_cols: int) -> int:
    """First code reserved for nonterminals given a dictionary and column count."""
    return 1 + n_values * n_cols


def pair_code(value_index: int, column: int, n_cols: int) -> int:
    """Code of the pair (value_index, column)."""
    return 1 + value_index * n_cols + column


def decode_symbol(code: int, base: int, n_cols: int) -> Pair | RowDelimiter | Nonterminal:
    """Turn an integer code back into a symbol object."""
    if code == DELIMITER_CODE:
        return ROW_DELIMITER
    if code >= base:
        return Nonterminal(code - base)
    t = code - 1
    return Pair(t // n_cols, t % n_cols)
