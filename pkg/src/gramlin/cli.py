"""Command-line interface.

Subcommands: ``compress``, ``decompress``, ``info``, ``reorder``, ``bench``.
All reports are machine-parseable ``key=value`` lines on stdout.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 malformed input or
container, 5 dimension/argument mismatch.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .bench import BenchConfig, run_bench
from .blocking import BlockedMatrix, blocked_csrv, build_blocked, decode_blocked, resolve_workers
from .csrv import CsrvMatrix, build_csrv
from .errors import DimensionError, FormatError, GramlinError, IngestError
from .grammar import Grammar, grammar_stats
from .io import read_matrix, write_matrix
from .reorder import ALGORITHMS, choose_best_reordering
from .serialization import MAGIC, deserialize, normalize_variant, serialize, size_report

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_DIMENSION = 5

_VARIANT_CHOICES = ("csrv", "re32", "reiv", "reans", "re_32", "re_iv", "re_ans")
_REORDER_CHOICES = ("none",) + ALGORITHMS + ("best",)


def _emit(pairs: dict[str, object]) -> None:
    for key, value in pairs.items():
        print(f"{key}={value}")


def _as_blocked(obj: Grammar | CsrvMatrix | BlockedMatrix) -> BlockedMatrix:
    if isinstance(obj, BlockedMatrix):
        return obj
    return BlockedMatrix(
        n_rows=obj.n_rows, n_cols=obj.n_cols, values=obj.values, blocks=(obj,)
    )


def _load_container(path: str) -> bytes:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise FormatError(f"{path}: not a compressed matrix container")
    return data


def _reorder_algorithms(choice: str) -> tuple[str, ...]:
    return ALGORITHMS if choice == "best" else (choice,)


def _cmd_compress(args: argparse.Namespace) -> int:
    variant = normalize_variant(args.variant)
    matrix = read_matrix(args.input, args.format)
    workers = resolve_workers(args.workers)
    t0 = time.perf_counter()
    decisions = []
    if variant == "csrv":
        bm = blocked_csrv(matrix, args.blocks)
        if args.reorder != "none":
            print("reorder=skipped  # csrv stores the raw sequence; size is order-invariant", file=sys.stderr)
    elif args.reorder != "none":
        bm, decisions = choose_best_reordering(
            matrix,
            n_blocks=args.blocks,
            variant=variant,
            algorithms=_reorder_algorithms(args.reorder),
            prune=args.prune,
            k=args.k,
            workers=workers,
        )
    else:
        bm = build_blocked(matrix, args.blocks, workers=workers)
    data = serialize(bm, variant)
    seconds = time.perf_counter() - t0
    Path(args.output).write_bytes(data)
    report = size_report(data)
    _emit(
        {
            "input": args.input,
            "output": args.output,
            "n_rows": report.n_rows,
            "n_cols": report.n_cols,
            "variant": report.variant,
            "blocks": report.n_blocks,
            "workers": workers,
            "reorder": args.reorder,
            "seconds": f"{seconds:.3f}",
            "bytes": report.total_bytes,
            "dense_bytes": report.dense_bytes,
            "ratio": f"{report.ratio:.6f}",
        }
    )
    for d in decisions:
        chosen = {
            "block": d.block,
            "chosen": d.chosen,
            "bytes": d.bytes,
        }
        _emit({f"reorder_block_{d.block}_{k}": v for k, v in chosen.items()})
    return EXIT_OK


def _cmd_decompress(args: argparse.Namespace) -> int:
    data = _load_container(args.input)
    bm = _as_blocked(deserialize(data))
    dense = decode_blocked(bm)
    write_matrix(args.output, dense, args.format)
    _emit(
        {
            "input": args.input,
            "output": args.output,
            "n_rows": dense.shape[0],
            "n_cols": dense.shape[1],
        }
    )
    return EXIT_OK


def _cmd_info(args: argparse.Namespace) -> int:
    data = _load_container(args.input)
    report = size_report(data)
    _emit(
        {
            "input": args.input,
            "variant": report.variant,
            "n_rows": report.n_rows,
            "n_cols": report.n_cols,
            "blocks": report.n_blocks,
            "n_values": report.n_values,
            "bytes": report.total_bytes,
            "values_bytes": report.values_bytes,
            "payload_bytes": report.payload_bytes,
            "dense_bytes": report.dense_bytes,
            "ratio": f"{report.ratio:.6f}",
        }
    )
    obj = deserialize(data)
    blocks = _as_blocked(obj).blocks
    for idx, blk in enumerate(blocks):
        line: dict[str, object] = {
            "block": idx,
            "rows": blk.n_rows,
            "payload_bytes": report.block_payload_bytes[idx],
            "stored_codes": report.block_code_counts[idx],
        }
        if isinstance(blk, Grammar):
            st = grammar_stats(blk)
            line.update(
                {
                    "rules": st.n_rules,
                    "final_symbols": st.final_symbols,
                    "grammar_size": st.size,
                    "sequence_symbols": st.sequence_symbols,
                    "nnz": st.nnz,
                }
            )
        else:
            line.update({"sequence_symbols": len(blk.codes), "nnz": blk.nnz})
        print(" ".join(f"{k}={v}" for k, v in line.items()))
    return EXIT_OK


def _cmd_reorder(args: argparse.Namespace) -> int:
    variant = normalize_variant(args.variant)
    if variant == "csrv":
        raise DimensionError("reordering only changes grammar variants; pick re32/reiv/reans")
    matrix = read_matrix(args.input, args.format)
    workers = resolve_workers(args.workers)
    algorithms = _reorder_algorithms(args.reorder)
    t0 = time.perf_counter()
    bm, decisions = choose_best_reordering(
        matrix,
        n_blocks=args.blocks,
        variant=variant,
        algorithms=algorithms,
        prune=args.prune,
        k=args.k,
        workers=workers,
    )
    seconds = time.perf_counter() - t0
    _emit(
        {
            "input": args.input,
            "variant": variant,
            "blocks": len(decisions),
            "prune": args.prune,
            "k": args.k,
            "seconds": f"{seconds:.3f}",
        }
    )
    for d in decisions:
        for name, nbytes in d.candidate_bytes:
            print(f"block={d.block} algorithm={name} payload_bytes={nbytes}")
        print(f"block={d.block} chosen={d.chosen} payload_bytes={d.bytes}")
    if args.out:
        data = serialize(bm, variant)
        Path(args.out).write_bytes(data)
        _emit({"output": args.out, "bytes": len(data)})
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    raw = Path(args.input).read_bytes()
    if raw[:4] == MAGIC:
        bm = _as_blocked(deserialize(raw))
        variant = size_report(raw).variant
    else:
        matrix = read_matrix(args.input, args.format)
        variant = normalize_variant(args.variant)
        if variant == "csrv":
            bm = blocked_csrv(matrix, args.blocks)
        else:
            bm = build_blocked(matrix, args.blocks, workers=resolve_workers(args.workers))
    config = BenchConfig(iterations=args.iters, workers=args.workers, seed=args.seed)
    report = run_bench(bm, config)
    _emit(
        {
            "input": args.input,
            "variant": variant,
            "blocks": bm.n_blocks,
            "n_rows": bm.n_rows,
            "n_cols": bm.n_cols,
            **report.as_dict(),
        }
    )
    if args.x_out:
        report.x_final.astype("<f8").tofile(args.x_out)
        _emit({"x_out": args.x_out})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gramlin",
        description="Grammar-compressed matrices with multiplication on the compressed form.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_matrix_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("mtx", "csv", "bin"), default=None,
                       help="input format (default: by file suffix)")

    def add_compression_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--variant", choices=_VARIANT_CHOICES, default="reiv",
                       help="storage variant (default: reiv)")
        p.add_argument("--blocks", type=int, default=1, help="row block count")
        p.add_argument("--workers", type=int, default=None,
                       help="thread count (default: GRAMLIN_WORKERS or CPU count)")

    def add_reorder_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--prune", choices=("full", "local", "global"), default="local",
                       help="similarity pruning mode (default: local)")
        p.add_argument("--k", type=int, default=16,
                       help="retained scores per column / overall (default: 16)")

    p = sub.add_parser("compress", help="compress a matrix file into a container")
    p.add_argument("input")
    p.add_argument("output")
    add_common_matrix_args(p)
    add_compression_args(p)
    p.add_argument("--reorder", choices=_REORDER_CHOICES, default="none",
                   help="column reordering candidates (default: none)")
    add_reorder_args(p)
    p.set_defaults(func=_cmd_compress)

    p = sub.add_parser("decompress", help="reconstruct the dense matrix exactly")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--format", choices=("mtx", "csv", "bin"), default=None,
                   help="output format (default: by file suffix)")
    p.set_defaults(func=_cmd_decompress)

    p = sub.add_parser("info", help="report container sizes and per-block stats")
    p.add_argument("input")
    p.set_defaults(func=_cmd_info)

    p = sub.add_parser("reorder", help="evaluate column reorderings per row block")
    p.add_argument("input")
    p.add_argument("--out", default=None, help="write the winning container here")
    add_common_matrix_args(p)
    add_compression_args(p)
    p.add_argument("--reorder", choices=_REORDER_CHOICES[1:], default="best",
                   help="candidate algorithms (default: best = all)")
    add_reorder_args(p)
    p.set_defaults(func=_cmd_reorder)

    p = sub.add_parser("bench", help="alternating multiplication benchmark")
    p.add_argument("input", help="container or matrix file")
    add_common_matrix_args(p)
    add_compression_args(p)
    p.add_argument("--iters", type=int, default=500, help="iterations (default: 500)")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for a random start vector (default: all ones)")
    p.add_argument("--x-out", default=None, help="write the final iterate as raw f8")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PermissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except IsADirectoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FormatError, IngestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except GramlinError as exc:  # pragma: no cover - catch-all for subclasses
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
