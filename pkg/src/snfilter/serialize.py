"""Line-oriented text format for datasets and filter sets.

::

    SNDS v1 n=5 d=2 universe=full count=4
    N 1-2 3-4;1-3 2-5
    S 00000,00001,...

Vectors are written channel 1 first and listed in ascending word order.
``N -`` is the empty network, ``.`` an empty level, ``S -`` an empty set.
Parsing is strict: any file that would not re-serialize byte for byte is
rejected.
"""

from __future__ import annotations

import os
import re
from pathlib import Path

import numpy as np

from .minrep import Dataset, Universe
from .model import MAX_CHANNELS, Level, Network, OutputSet, UsageError
from .pipeline import FilterSet

MAGIC = "SNDS"
VERSION = "v1"

_HEADER = re.compile(
    r"SNDS v1 n=(?P<n>0|[1-9]\d*) d=(?P<d>0|[1-9]\d*) "
    r"universe=(?P<u>full|omega:(?:0|[1-9]\d*)) count=(?P<count>0|[1-9]\d*)"
)
_COMPARATOR = re.compile(r"([1-9]\d*)-([1-9]\d*)")


class DatasetFormatError(ValueError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


def _format_level(level: Level) -> str:
    if not len(level):
        return "."
    return " ".join(f"{c.lo}-{c.hi}" for c in level)


def _format_network(net: Network) -> str:
    if net.depth == 0:
        return "N -"
    return "N " + ";".join(_format_level(lv) for lv in net.levels)


def _format_set(s: OutputSet) -> str:
    if not len(s):
        return "S -"
    n = s.n
    # channel 1 (bit 0) leftmost
    bits = (s.words[:, None].astype(np.int64) >> np.arange(n)) & 1
    rows = (bits + ord("0")).astype(np.uint8)
    return "S " + ",".join(r.tobytes().decode("ascii") for r in rows)


def format_dataset(data: Dataset, depth: int | None = None) -> str:
    if depth is None:
        depths = {net.depth for net in data.networks}
        if len(depths) > 1:
            raise UsageError(f"mixed network depths {sorted(depths)}; pass depth explicitly")
        depth = depths.pop() if depths else 0
    lines = [f"{MAGIC} {VERSION} n={data.n} d={depth} universe={data.universe.tag} count={len(data)}"]
    for net, s in data:
        lines.append(_format_network(net))
        lines.append(_format_set(s))
    return "\n".join(lines) + "\n"


def _parse_network(text: str, n: int, depth: int, lineno: int) -> Network:
    if not text.startswith("N "):
        raise DatasetFormatError(lineno, "expected a network line starting with 'N '")
    body = text[2:]
    if body == "-":
        if depth != 0:
            raise DatasetFormatError(lineno, f"empty network in a depth-{depth} file")
        return Network.empty(n)
    levels = []
    for part in body.split(";"):
        if part == ".":
            levels.append(Level((), n))
            continue
        pairs = []
        for tok in part.split(" "):
            m = _COMPARATOR.fullmatch(tok)
            if not m:
                raise DatasetFormatError(lineno, f"bad comparator {tok!r}")
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi > n:
                raise DatasetFormatError(lineno, f"comparator {tok} exceeds n={n}")
            pairs.append((lo, hi))
        if pairs != sorted(pairs):
            raise DatasetFormatError(lineno, "comparators not in ascending order")
        try:
            levels.append(Level.of(pairs, n))
        except UsageError as exc:
            raise DatasetFormatError(lineno, str(exc)) from None
    if len(levels) != depth:
        raise DatasetFormatError(lineno, f"network has {len(levels)} levels, header says d={depth}")
    return Network(tuple(levels), n)


def _parse_set(text: str, n: int, lineno: int) -> OutputSet:
    if not text.startswith("S "):
        raise DatasetFormatError(lineno, "expected a set line starting with 'S '")
    body = text[2:]
    if body == "-":
        return OutputSet(np.zeros(0, dtype=np.uint16), n, trusted=True)
    toks = body.split(",")
    for tok in toks:
        if len(tok) != n or tok.strip("01"):
            raise DatasetFormatError(lineno, f"bad vector {tok!r} for n={n}")
    raw = np.frombuffer("".join(toks).encode("ascii"), dtype=np.uint8).reshape(len(toks), n) - ord("0")
    words = (raw.astype(np.int64) << np.arange(n)).sum(axis=1)
    if np.any(np.diff(words) <= 0):
        raise DatasetFormatError(lineno, "vectors not in strictly ascending word order")
    return OutputSet(words.astype(np.uint16), n, trusted=True)


def parse_dataset(text: str) -> tuple[Dataset, int]:
    """Parse a file body; returns the dataset and the header depth."""
    if not text.endswith("\n"):
        raise DatasetFormatError(max(1, text.count("\n") + 1), "missing final newline")
    lines = text[:-1].split("\n")
    m = _HEADER.fullmatch(lines[0])
    if not m:
        raise DatasetFormatError(1, f"malformed header {lines[0][:80]!r}")
    n, depth, count = int(m.group("n")), int(m.group("d")), int(m.group("count"))
    if not 1 <= n <= MAX_CHANNELS:
        raise DatasetFormatError(1, f"n={n} outside 1..{MAX_CHANNELS}")
    universe = Universe.parse(m.group("u"))
    if universe.omega is not None and universe.omega > n:
        raise DatasetFormatError(1, f"omega {universe.omega} exceeds n={n}")
    body = lines[1:]
    if len(body) != 2 * count:
        where = 1 + min(len(body), 2 * count) + 1
        raise DatasetFormatError(where, f"header announces {count} records, found {len(body) / 2:g}")
    data = Dataset(n, universe=universe)
    for k in range(count):
        ln = 2 + 2 * k
        net = _parse_network(body[2 * k], n, depth, ln)
        s = _parse_set(body[2 * k + 1], n, ln + 1)
        data.append(net, s)
    return data, depth


def save_dataset(path: str | os.PathLike, data: Dataset, depth: int | None = None) -> None:
    Path(path).write_text(format_dataset(data, depth), encoding="utf-8")


def load_dataset(path: str | os.PathLike) -> Dataset:
    return parse_dataset(Path(path).read_text(encoding="utf-8"))[0]


def save_filter_set(path: str | os.PathLike, fs: FilterSet) -> None:
    save_dataset(path, fs.records, fs.depth)


def load_filter_set(path: str | os.PathLike) -> FilterSet:
    data, depth = parse_dataset(Path(path).read_text(encoding="utf-8"))
    return FilterSet(data.n, depth, data.universe, data)
