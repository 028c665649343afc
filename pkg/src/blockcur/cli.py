"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from collections import Counter
from pathlib import Path

from . import experiments as ex
from .cur import decompose, relative_error
from .errors import CurError, MatrixLoadError
from .matrix import load_matrix, store_matrix

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VERIFY = 3

THREADS_ENV = "BLOCKCUR_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which is reserved for I/O errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_common(p, threads=True, blocks=True, tol=True, out=True):
    if threads:
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (default: ${THREADS_ENV} or 1)")
    if blocks:
        p.add_argument("--blocks", type=int, default=None, help="block count (default: threads)")
    if tol:
        p.add_argument("--tol", type=float, default=None, help="relative early-stop tolerance")
    if out:
        p.add_argument("--out", default=None, help="output path")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockcur", description="Blockwise CUR low-rank approximation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="CUR-decompose a stored matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["mm", "bin"], default=None,
                   help="input format (default: from file suffix, .mtx is mm)")
    p.add_argument("--rank", type=int, required=True, help="rows to select")
    p.add_argument("--col-rank", type=int, default=None, help="columns to select (default: --rank)")
    _add_common(p)

    p = sub.add_parser("experiment-hilbert", help="error study on Hilbert matrices")
    p.add_argument("--sizes", type=_int_list, default=list(ex.HILBERT_SIZES))
    p.add_argument("--max-selected", type=int, default=ex.HILBERT_MAX_SELECTED)
    _add_common(p)

    p = sub.add_parser("experiment-lowrank", help="error study on synthetic low-rank matrices")
    p.add_argument("--sizes", type=_int_list, default=list(ex.LOWRANK_SIZES))
    p.add_argument("--ranks", type=_int_list, default=list(ex.LOWRANK_RANKS))
    p.add_argument("--extra", type=int, default=ex.LOWRANK_EXTRA,
                   help="selections beyond the generator rank")
    _add_common(p)

    p = sub.add_parser("bench-scaling", help="thread-scaling benchmark with ACA baseline")
    p.add_argument("--size", type=int, default=None,
                   help=f"matrix size (default {ex.BENCH_SIZE}, or {ex.REFERENCE_BENCH_SIZE} with --paper-scale)")
    p.add_argument("--paper-scale", action="store_true")
    p.add_argument("--rank", type=int, default=ex.BENCH_RANK, help="rows/columns to select")
    p.add_argument("--thread-counts", type=_int_list, default=None,
                   help="explicit thread counts (default: 1, 2, 4, ... up to --threads)")
    p.add_argument("--reps", type=int, default=3)
    _add_common(p)

    p = sub.add_parser("verify", help="check the maxvol error bounds on a seeded battery")
    p.add_argument("--count", type=int, default=100, help="random 6x6 instances")
    _add_common(p, threads=False, blocks=False, tol=False)
    return parser


def _threads(args, fallback: int = 1) -> int:
    if args.threads is not None:
        threads = args.threads
    elif os.environ.get(THREADS_ENV):
        try:
            threads = int(os.environ[THREADS_ENV])
        except ValueError:
            raise UsageError(f"${THREADS_ENV} must be an integer") from None
    else:
        threads = fallback
    if threads < 1:
        raise UsageError(f"thread count must be >= 1, got {threads}")
    return threads


def _blocks(args, threads: int) -> int:
    b = threads if args.blocks is None else args.blocks
    if b < 1:
        raise UsageError(f"--blocks must be >= 1, got {b}")
    return b


def _tol(args, default: float) -> float:
    tol = default if args.tol is None else args.tol
    if tol < 0:
        raise UsageError(f"--tol must be >= 0, got {tol}")
    return tol


def _emit_csv(records, out) -> None:
    if out is None:
        ex.write_records(records, sys.stdout)
        return
    path = Path(out)
    tmp = path.with_name(path.name + ".part")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        ex.write_records(records, fh)
    os.replace(tmp, path)


def _check_out_writable(out) -> None:
    if out is None:
        return
    parent = Path(out).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise OSError(f"cannot write to {out}")


def cmd_decompose(args) -> int:
    r = args.rank
    c = r if args.col_rank is None else args.col_rank
    if r < 1 or c < 1:
        raise UsageError(f"--rank and --col-rank must be >= 1, got {r}, {c}")
    if args.out is None:
        raise UsageError("decompose needs --out DIR")
    threads = _threads(args)
    b = _blocks(args, threads)
    tol = _tol(args, ex.DEFAULT_TOL)

    A = load_matrix(args.input, args.format)
    m, n = A.shape
    if r > m or c > n:
        raise UsageError(f"requested {r} rows / {c} cols from a {m}x{n} matrix")
    if b > min(m, n):
        raise UsageError(f"--blocks {b} exceeds min(rows, cols) = {min(m, n)}")

    start = time.perf_counter()
    f = decompose(A, r, c, b, tol, threads)
    elapsed = time.perf_counter() - start
    err = relative_error(A, f)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "rows": m,
        "cols": n,
        "I": list(f.I),
        "J": list(f.J),
        "rank": r,
        "colRank": c,
        "blocks": b,
        "threads": threads,
        "tol": tol,
        "relError": err,
        "wallSeconds": elapsed,
    }
    for name, mat in (("C", f.C), ("core", f.core), ("R", f.R)):
        tmp = out / f"{name}.bin.part"
        store_matrix(mat, tmp, "bin")
        os.replace(tmp, out / f"{name}.bin")
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(f"selected {len(f.I)} rows, {len(f.J)} cols; relative error {err:.6e}; "
          f"{elapsed:.4f} s", file=sys.stderr)
    return EXIT_OK


def cmd_experiment_hilbert(args) -> int:
    threads = _threads(args)
    b = _blocks(args, threads)
    tol = _tol(args, ex.DEFAULT_TOL)
    if args.max_selected < 1 or not args.sizes or min(args.sizes) < 1:
        raise UsageError("sizes and --max-selected must be positive")
    if b > min(args.sizes):
        raise UsageError(f"--blocks {b} exceeds smallest size {min(args.sizes)}")
    _check_out_writable(args.out)
    records = ex.hilbert_study(args.sizes, args.max_selected, b, threads, tol)
    _emit_csv(records, args.out)
    return EXIT_OK


def cmd_experiment_lowrank(args) -> int:
    threads = _threads(args)
    b = _blocks(args, threads)
    tol = _tol(args, ex.DEFAULT_TOL)
    if not args.sizes or not args.ranks or min(args.sizes) < 1 or min(args.ranks) < 1:
        raise UsageError("sizes and ranks must be positive")
    if max(args.ranks) > min(args.sizes):
        raise UsageError("every rank must be <= every size")
    if args.extra < 0:
        raise UsageError("--extra must be >= 0")
    if b > min(args.sizes):
        raise UsageError(f"--blocks {b} exceeds smallest size {min(args.sizes)}")
    _check_out_writable(args.out)
    records = ex.lowrank_study(args.sizes, args.ranks, args.extra, b, threads, tol)
    _emit_csv(records, args.out)
    return EXIT_OK


def cmd_bench_scaling(args) -> int:
    n = args.size or (ex.REFERENCE_BENCH_SIZE if args.paper_scale else ex.BENCH_SIZE)
    if n < 1 or args.rank < 1 or args.rank > n:
        raise UsageError(f"need 1 <= --rank <= --size, got rank {args.rank}, size {n}")
    if args.reps < 3:
        raise UsageError(f"--reps must be >= 3, got {args.reps}")
    counts = args.thread_counts or ex.default_thread_counts(_threads(args, os.cpu_count() or 1))
    if min(counts) < 1:
        raise UsageError("thread counts must be >= 1")
    if args.blocks is not None and not 1 <= args.blocks <= n:
        raise UsageError(f"--blocks must lie in [1, {n}]")
    tol = _tol(args, 0.0)
    _check_out_writable(args.out)
    records = ex.scaling_study(counts, n, min(args.rank, n), args.rank, args.reps, args.blocks, tol)
    _emit_csv(records, args.out)
    for rec in records:
        print(f"{rec.experiment:20s} threads={rec.threads:3d} blocks={rec.blocks:3d} "
              f"{rec.wall_seconds:.4f} s", file=sys.stderr)
    if n == ex.REFERENCE_BENCH_SIZE:
        print(f"reference (64-core EPYC): sequential {ex.REFERENCE_SEQUENTIAL_SECONDS} s, "
              f"2 procs {ex.REFERENCE_TWO_PROCESS_SECONDS} s, "
              f"64 procs {ex.REFERENCE_SIXTY_FOUR_PROCESS_SECONDS} s", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.count < 0:
        raise UsageError("--count must be >= 0")
    _check_out_writable(args.out)
    rows = ex.theorem_battery(seed=args.seed, random_count=args.count)
    lines = [f"{'case':14s} {'r':>2s} {'thm':>3s} {'status':6s} {'lhs':>12s} {'rhs':>12s}"]
    for row in rows:
        lines.append(f"{row.case:14s} {row.r:2d} {row.theorem:3d} {row.status:6s} "
                     f"{row.lhs:12.4e} {row.rhs:12.4e}")
    tally = Counter(row.status for row in rows)
    lines.append(f"pass={tally['pass']} fail={tally['fail']} skip={tally['skip']}")
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
        sys.stdout.write(lines[-1] + "\n")
    return EXIT_VERIFY if tally["fail"] else EXIT_OK


COMMANDS = {
    "decompose": cmd_decompose,
    "experiment-hilbert": cmd_experiment_hilbert,
    "experiment-lowrank": cmd_experiment_lowrank,
    "bench-scaling": cmd_bench_scaling,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, CurError) as exc:
        if isinstance(exc, MatrixLoadError):
            print(f"blockcur: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"blockcur: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"blockcur: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
