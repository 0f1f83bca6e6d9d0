"""Lossless grammar compression for real-valued matrices.

A matrix becomes a dictionary of its distinct non-zero values plus one
delimited (value, column) pair sequence; recursive pair replacement turns the
sequence into a small binary grammar, and both matrix-vector products run
directly on the grammar in time proportional to its size.  Row blocking,
column reordering, compact storage variants, and a benchmark CLI sit on top.
"""

from .bench import BenchConfig, BenchReport, run_bench
from .blocking import (
    BlockedMatrix,
    blocked_csrv,
    blocked_left_mult,
    blocked_right_mult,
    build_blocked,
    decode_blocked,
    resolve_workers,
    split_csrv,
)
from .codes import Pair, RowDelimiter, ROW_DELIMITER, Nonterminal
from .csrv import (
    CsrvMatrix,
    build_csrv,
    csrv_left_mult,
    csrv_right_mult,
    decode_csrv,
    validate_csrv,
)
from .errors import DimensionError, FormatError, GramlinError, IngestError
from .grammar import (
    Grammar,
    GrammarStats,
    canonical_form,
    compress,
    expand,
    grammar_stats,
    rule_lengths,
    validate_grammar,
)
from .io import read_matrix, write_matrix
from .multiply import (
    OpCounts,
    left_mult,
    left_mult_counted,
    op_counter,
    right_mult,
    right_mult_counted,
)
from .reorder import (
    ALGORITHMS,
    ColumnPermutation,
    ReorderDecision,
    apply_permutation,
    choose_best_reordering,
    identity_permutation,
    reorder_by,
    reorder_mwm,
    reorder_pathcover,
    reorder_pathcover_plus,
    reorder_tsp,
)
from .repair import repair_sequence
from .serialization import (
    SizeReport,
    VARIANTS,
    deserialize,
    normalize_variant,
    payload_bytes,
    serialize,
    size_report,
)
from .similarity import SimilarityMatrix, build_csm

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "BenchConfig",
    "BenchReport",
    "BlockedMatrix",
    "ColumnPermutation",
    "CsrvMatrix",
    "DimensionError",
    "FormatError",
    "Grammar",
    "GrammarStats",
    "GramlinError",
    "IngestError",
    "Nonterminal",
    "OpCounts",
    "Pair",
    "ReorderDecision",
    "ROW_DELIMITER",
    "RowDelimiter",
    "SimilarityMatrix",
    "SizeReport",
    "VARIANTS",
    "apply_permutation",
    "blocked_csrv",
    "blocked_left_mult",
    "blocked_right_mult",
    "build_blocked",
    "build_csm",
    "build_csrv",
    "canonical_form",
    "choose_best_reordering",
    "compress",
    "csrv_left_mult",
    "csrv_right_mult",
    "decode_blocked",
    "decode_csrv",
    "deserialize",
    "expand",
    "grammar_stats",
    "identity_permutation",
    "left_mult",
    "left_mult_counted",
    "normalize_variant",
    "op_counter",
    "payload_bytes",
    "read_matrix",
    "reorder_by",
    "reorder_mwm",
    "reorder_pathcover",
    "reorder_pathcover_plus",
    "reorder_tsp",
    "repair_sequence",
    "resolve_workers",
    "right_mult",
    "right_mult_counted",
    "rule_lengths",
    "run_bench",
    "serialize",
    "size_report",
    "split_csrv",
    "validate_csrv",
    "validate_grammar",
    "write_matrix",
]
