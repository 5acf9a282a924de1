"""Command-line entry point: levels, pipeline, reduce, verify, stats, table."""

from __future__ import annotations

import argparse
import sys
import time
from typing import Sequence

from . import kernels
from .levels import count_levels, telephone_number
from .minrep import min_rep_perm_refl
from .model import MAX_CHANNELS, UsageError
from .pipeline import (
    DEFAULT_OMEGA,
    MEMORY_CAP_ENV,
    ResourceGuardError,
    compute_R,
    compute_R_omega,
    deepen,
    format_ratio,
    memory_cap,
    parse_size,
    sizes,
    speedup_table,
)
from .serialize import DatasetFormatError, load_filter_set, parse_dataset, save_dataset, save_filter_set
from .verify import prove_filter_complete

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_GUARD = 2
EXIT_USAGE = 64

LEVEL_ENUM_MAX_N = 14


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _channels(text: str) -> int:
    n = int(text)
    if not 2 <= n <= MAX_CHANNELS:
        raise argparse.ArgumentTypeError(f"n must be in 2..{MAX_CHANNELS}")
    return n


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _size(text: str) -> int:
    try:
        return parse_size(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _n_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi if sep else lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if not 2 <= a <= b <= MAX_CHANNELS:
        raise argparse.ArgumentTypeError(f"range must lie in 2..{MAX_CHANNELS}")
    return range(a, b + 1)


class _Progress:
    """Plain per-stage counter on stderr."""

    def __init__(self, enabled: bool) -> None:
        self.enabled = enabled
        self.t0 = time.perf_counter()

    def __call__(self, msg: str) -> None:
        if self.enabled:
            print(f"[{time.perf_counter() - self.t0:8.1f}s] {msg}", file=sys.stderr, flush=True)

    def ticks(self, label: str):
        if not self.enabled:
            return None
        return lambda done, total: self(f"{label}: reduced {done}/{total}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="snfilter",
        description="Minimal prefix sets for optimal-depth sorting network search.",
        epilog=f"Memory cap: --memory-cap wins over ${MEMORY_CAP_ENV}, default 3GiB.",
    )
    p.add_argument("--backend", choices=("cython", "python"), help="kernel backend (default: best available)")
    p.add_argument("-q", "--quiet", action="store_true", help="no progress on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("levels", help="count (or list) the levels on n channels")
    s.add_argument("--n", type=_channels, required=True)
    s.add_argument("--nonempty", action="store_true", help="exclude the empty level")
    s.add_argument("--list", action="store_true", help="print every level (n <= 8)")
    s.add_argument("--count-only", action="store_true", help="closed-form count, no enumeration")

    s = sub.add_parser("pipeline", help="compute a filter set and save it")
    s.add_argument("--n", type=_channels, required=True)
    s.add_argument("--depth", type=int, choices=(1, 2, 3), required=True)
    s.add_argument(
        "--omega", type=int, nargs="?", const=-1, default=None, metavar="W",
        help="restrict inputs; bare --omega uses the per-n default",
    )
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=_positive, default=1)
    s.add_argument("--memory-cap", type=_size, help="e.g. 2GiB")

    s = sub.add_parser("reduce", help="reduce a dataset up to permutation and reflection")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=_positive, default=1)

    s = sub.add_parser("verify", help="search for completions of every prefix")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--target-depth", type=int, required=True)
    s.add_argument("--expect", choices=("exists", "not-exists"))
    s.add_argument("--threads", type=_positive, default=1)
    s.add_argument("--no-memo", action="store_true")

    s = sub.add_parser("stats", help="summarize a dataset file")
    s.add_argument("--in", dest="inp", required=True)

    s = sub.add_parser("table", help="summary table over a range of n")
    s.add_argument("--n-range", type=_n_range, default=_n_range("5..10"))
    s.add_argument("--depth2-max", type=int, default=12, help="largest n for depth-2 rows")
    s.add_argument("--depth3-max", type=int, default=8, help="largest n for the depth-3 row")
    s.add_argument("--omega-depth3-max", type=int, default=9, help="largest n for the restricted depth-3 row")
    s.add_argument("--tsv", action="store_true", help="tab-separated output")
    s.add_argument("--threads", type=_positive, default=1)
    s.add_argument("--memory-cap", type=_size)
    return p


def _cmd_levels(args, progress) -> int:
    n = args.n
    if args.list:
        from .levels import all_levels, nonempty_levels

        if n > 8:
            raise UsageError("--list is limited to n <= 8")
        cat = nonempty_levels(n) if args.nonempty else all_levels(n)
        for lv in cat:
            print(" ".join(f"{c.lo}-{c.hi}" for c in lv) or ".")
        return EXIT_OK
    enumerate_all = not args.count_only and n <= LEVEL_ENUM_MAX_N
    total = count_levels(n, enumerate_all=enumerate_all)
    print(total - 1 if args.nonempty else total)
    return EXIT_OK


def _cmd_pipeline(args, progress) -> int:
    cap = memory_cap(args.memory_cap)
    if args.omega is None:
        fs = compute_R(args.n, args.depth, threads=args.threads, backend=args.backend, cap=cap, progress=progress)
    else:
        omega = DEFAULT_OMEGA.get(args.n, 0) if args.omega == -1 else args.omega
        if args.depth < 2:
            raise UsageError("restricted runs need --depth 2 or 3")
        fs = compute_R_omega(
            args.n, args.depth, omega, threads=args.threads, backend=args.backend, cap=cap, progress=progress
        )
    save_filter_set(args.out, fs)
    print(f"count: {len(fs)}")
    return EXIT_OK


def _cmd_reduce(args, progress) -> int:
    with open(args.inp, encoding="utf-8") as fh:
        data, depth = parse_dataset(fh.read())
    reduced = min_rep_perm_refl(data, args.threads, backend=args.backend, progress=progress.ticks("reduce"))
    save_dataset(args.out, reduced, depth)
    print(f"count: {len(reduced)}")
    return EXIT_OK


def _cmd_verify(args, progress) -> int:
    fs = load_filter_set(args.inp)
    res = prove_filter_complete(
        fs, args.target_depth, threads=args.threads, use_memo=not args.no_memo, backend=args.backend
    )
    extended = sum(row.extends for row in res.table)
    print(f"verdict: {res.verdict}")
    print(f"prefixes: {len(res.table)} extendable: {extended}")
    if res.witness is not None:
        print("witness: " + ";".join(" ".join(f"{c.lo}-{c.hi}" for c in lv) for lv in res.witness.levels))
    if args.expect and args.expect != res.verdict:
        print(f"expected {args.expect}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _cmd_stats(args, progress) -> int:
    fs = load_filter_set(args.inp)
    print(f"n: {fs.n}")
    print(f"depth: {fs.depth}")
    print(f"universe: {fs.universe.tag}")
    print(f"count: {len(fs)}")
    if len(fs):
        sz = sizes(fs.records)
        print(f"set sizes: min {sz.min()} max {sz.max()} mean {sz.mean():.1f}")
    return EXIT_OK


TABLE_COLUMNS = (
    "n", "|G_n|", "|R_{n,1}|", "|R_{n,2}|", "|R_{n,2}↾ω|", "ω", "|R_{n,3}|", "|R_{n,3}^ω|",
    "⌊|R_{n,2}|·|G_n|/|R_{n,3}|⌋", "⌊|R_{n,2}|·|G_n|/|R_{n,3}^ω|⌋",
)


def table_rows(
    ns: Sequence[int],
    *,
    depth2_max: int = 12,
    depth3_max: int = 8,
    omega_depth3_max: int = 9,
    threads: int = 1,
    backend: str | None = None,
    cap: int | None = None,
    progress=None,
) -> list[list[str]]:
    rows = []
    for n in ns:
        kw = dict(threads=threads, backend=backend, cap=cap, progress=progress)
        omega = DEFAULT_OMEGA.get(n, 0)
        r1 = compute_R(n, 1, **kw)
        r2 = r3 = r2w = r3w = None
        if n <= depth2_max:
            r2 = deepen(r1, 2, **kw)
            if n <= depth3_max:
                r3 = deepen(r2, 3, **kw)
            r2w = compute_R_omega(n, 2, omega, **kw)
            if n <= omega_depth3_max:
                r3w = deepen(r2w, 3, **kw)
        cells = [n, telephone_number(n), len(r1)]
        cells += [len(x) if x is not None else None for x in (r2, r2w)]
        cells += [omega] + [len(x) if x is not None else None for x in (r3, r3w)]
        if r2 is not None and (r3 is not None or r3w is not None):
            row = speedup_table(
                n, len(r2), None if r3 is None else len(r3), None if r3w is None else len(r3w)
            )
            cells += [row.speedup, row.speedup_omega]
        else:
            cells += [None, None]
        rows.append([
            "-" if c is None else (format_ratio(c) if not isinstance(c, int) else str(c)) for c in cells
        ])
    return rows


def _cmd_table(args, progress) -> int:
    rows = table_rows(
        args.n_range,
        depth2_max=args.depth2_max,
        depth3_max=args.depth3_max,
        omega_depth3_max=args.omega_depth3_max,
        threads=args.threads,
        backend=args.backend,
        cap=memory_cap(args.memory_cap),
        progress=progress,
    )
    if args.tsv:
        print("\t".join(TABLE_COLUMNS))
        for r in rows:
            print("\t".join(r))
    else:
        widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(TABLE_COLUMNS)]
        print("  ".join(h.rjust(w) for h, w in zip(TABLE_COLUMNS, widths)))
        for r in rows:
            print("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    return EXIT_OK


COMMANDS = {
    "levels": _cmd_levels,
    "pipeline": _cmd_pipeline,
    "reduce": _cmd_reduce,
    "verify": _cmd_verify,
    "stats": _cmd_stats,
    "table": _cmd_table,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.backend and args.backend not in kernels.available():
        print(f"snfilter: backend {args.backend!r} not built", file=sys.stderr)
        return EXIT_USAGE
    progress = _Progress(not args.quiet)
    try:
        return COMMANDS[args.command](args, progress)
    except ResourceGuardError as exc:
        print(f"snfilter: refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, DatasetFormatError, OSError) as exc:
        print(f"snfilter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
