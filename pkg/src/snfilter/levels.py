"""Enumeration of all levels (matchings of the complete graph on n channels)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator

import numpy as np

from .model import MAX_CHANNELS, Level, UsageError


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_CHANNELS:
        raise UsageError(f"channel count must be in 1..{MAX_CHANNELS}, got {n}")


def iter_level_pairs(n: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Yield every level as a sorted tuple of 1-based (lo, hi) pairs.

    Pre-order over comparator lists with increasing ``lo``, so the output is
    already in lexicographic order (a list precedes its extensions).
    """
    _check_n(n)
    used = [False] * (n + 1)
    current: list[tuple[int, int]] = []

    def walk(min_lo: int):
        yield tuple(current)
        for lo in range(min_lo, n):
            if used[lo]:
                continue
            used[lo] = True
            for hi in range(lo + 1, n + 1):
                if used[hi]:
                    continue
                used[hi] = True
                current.append((lo, hi))
                yield from walk(lo + 1)
                current.pop()
                used[hi] = False
            used[lo] = False

    yield from walk(1)


def telephone_number(n: int) -> int:
    """Number of matchings on n points, empty matching included."""
    a, b = 1, 1
    for k in range(2, n + 1):
        a, b = b, b + (k - 1) * a
    return b if n >= 1 else 1


def count_levels(n: int, *, enumerate_all: bool = True) -> int:
    if not enumerate_all:
        _check_n(n)
        return telephone_number(n)
    return sum(1 for _ in iter_level_pairs(n))


@dataclass(frozen=True)
class LevelCatalog:
    n: int
    levels: tuple[Level, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self) -> Iterator[Level]:
        return iter(self.levels)

    def __getitem__(self, i):
        return self.levels[i]

    @cached_property
    def packed(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(lo bits, hi bits, offsets) with 0-based bit positions, kernel layout."""
        lo, hi, offsets = [], [], [0]
        for lv in self.levels:
            for c in lv.comparators:
                lo.append(c.lo - 1)
                hi.append(c.hi - 1)
            offsets.append(len(lo))
        return (
            np.array(lo, dtype=np.int32),
            np.array(hi, dtype=np.int32),
            np.array(offsets, dtype=np.int64),
        )


def all_levels(n: int) -> LevelCatalog:
    """Every level on n channels including the empty one, lexicographic order."""
    return LevelCatalog(n, tuple(Level.of(p, n) for p in iter_level_pairs(n)))


def nonempty_levels(n: int) -> LevelCatalog:
    cat = all_levels(n)
    return LevelCatalog(n, cat.levels[1:])


def maximal_first_level(n: int) -> Level:
    if n < 2:
        raise UsageError("a maximal level needs at least 2 channels")
    return Level.of(((2 * k + 1, 2 * k + 2) for k in range(n // 2)), n)


def max_comparator_level(n: int, k: int) -> Level:
    """The lexicographically least level with k comparators."""
    return Level.of(((2 * t + 1, 2 * t + 2) for t in range(k)), n)
