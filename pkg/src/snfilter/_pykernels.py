"""Pure-Python kernels, used when the compiled extension is unavailable.

Same contracts as the compiled module; see ``_ckernels.pyx``.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import Counter

import numpy as np

BACKEND = "python"
MAXN = 16


class _Info:
    __slots__ = ("words", "wordset", "size", "hist", "prof")

    def __init__(self, words, n: int) -> None:
        self.words = [int(x) for x in words]
        self.wordset = frozenset(self.words)
        self.size = len(self.words)
        hist = [0] * (n + 1)
        prof = [[0] * (n + 1) for _ in range(n)]
        for x in self.words:
            k = x.bit_count()
            hist[k] += 1
            while x:
                low = x & -x
                prof[low.bit_length() - 1][k] += 1
                x ^= low
        self.hist = hist
        self.prof = prof


def _channel_candidates(a: _Info, b: _Info, n: int):
    cand = []
    for i in range(n):
        m = 0
        pa_row = a.prof[i]
        for j in range(n):
            pb_row = b.prof[j]
            for k in range(n + 1):
                pa, pb = pa_row[k], pb_row[k]
                if pa > pb or a.hist[k] - pa > b.hist[k] - pb:
                    break
            else:
                m |= 1 << j
        if not m:
            return None
        cand.append(m)
    return cand


def _perfect_matching(cand, n: int) -> bool:
    owner = [-1] * n

    def augment(i, seen):
        m = cand[i] & ~seen[0]
        while m:
            low = m & -m
            j = low.bit_length() - 1
            m ^= low
            seen[0] |= low
            if owner[j] < 0 or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    return all(augment(i, [0]) for i in range(n))


def _embed(a: _Info, b: _Info, n: int):
    if a.size > b.size or any(x > y for x, y in zip(a.hist, b.hist)):
        return None
    if a.size == 0:
        return list(range(n))
    cand = _channel_candidates(a, b, n)
    if cand is None or not _perfect_matching(cand, n):
        return None

    image = [-1] * n
    cells_a = [x.bit_count() for x in a.words]
    cells_b = [y.bit_count() for y in b.words]

    def refine(cur_a, cur_b, i, j):
        nxt_b = [2 * c + ((y >> j) & 1) for c, y in zip(cur_b, b.words)]
        nxt_a = [2 * c + ((x >> i) & 1) for c, x in zip(cur_a, a.words)]
        count_b = Counter(nxt_b)
        count_a = Counter(nxt_a)
        for r, c in count_a.items():
            if c > count_b.get(r, 0):
                return None
        remap = {r: k for k, r in enumerate(sorted(count_b))}
        return [remap[r] for r in nxt_a], [remap[r] for r in nxt_b]

    def descend(cur_a, cur_b, used, done):
        if done == (1 << n) - 1:
            return True
        best, bestc = -1, n + 1
        for i in range(n):
            if not (done >> i) & 1:
                c = (cand[i] & ~used).bit_count()
                if c < bestc:
                    best, bestc = i, c
        m = cand[best] & ~used
        while m:
            low = m & -m
            j = low.bit_length() - 1
            m ^= low
            split = refine(cur_a, cur_b, best, j)
            if split is None:
                continue
            image[best] = j
            if descend(split[0], split[1], used | low, done | (1 << best)):
                return True
            image[best] = -1
        return False

    if not descend(cells_a, cells_b, 0, 0):
        return None
    for x in a.words:
        y = 0
        for i in range(n):
            if (x >> i) & 1:
                y |= 1 << image[i]
        if y not in b.wordset:
            return None
    return image


def find_embedding(a_words, b_words, n: int):
    """Return a 0-based channel image mapping a into b, or None."""
    if not 1 <= n <= MAXN:
        raise ValueError(f"n must be in 1..{MAXN}, got {n}")
    return _embed(_Info(a_words, n), _Info(b_words, n), n)


class SetBank:
    """Growing collection of sets probed with :meth:`first_subsumer`."""

    def __init__(self, n: int) -> None:
        if not 1 <= n <= MAXN:
            raise ValueError(f"n must be in 1..{MAXN}, got {n}")
        self.n = n
        self._infos: list[_Info] = []
        self._keys: list[int] = []
        self._order: list[int] = []

    def __len__(self) -> int:
        return len(self._infos)

    def add(self, words, key: int) -> int:
        slot = len(self._infos)
        self._infos.append(_Info(words, self.n))
        self._keys.append(key)
        sorted_keys = [self._keys[s] for s in self._order]
        self._order.insert(bisect_right(sorted_keys, key), slot)
        return slot

    def first_subsumer(self, b_words, since: int = 0) -> int:
        b = _Info(b_words, self.n)
        for slot in self._order:
            if slot >= since and _embed(self._infos[slot], b, self.n) is not None:
                return self._keys[slot]
        return -1


def apply_levels(words, n: int, comp_lo, comp_hi, level_offsets):
    """Apply every packed level to ``words``; returns ``(out, offsets)``."""
    base = np.asarray(words, dtype=np.uint32)
    lo = np.asarray(comp_lo, dtype=np.int64)
    hi = np.asarray(comp_hi, dtype=np.int64)
    offs = np.asarray(level_offsets, dtype=np.int64)
    pieces = []
    offsets = np.zeros(len(offs), dtype=np.int64)
    for t in range(len(offs) - 1):
        y = base.copy()
        for c in range(offs[t], offs[t + 1]):
            p, q = int(lo[c]), int(hi[c])
            swap = ((y >> p) & 1) & (((y >> q) & 1) ^ 1)
            y ^= swap * np.uint32((1 << p) | (1 << q))
        image = np.unique(y).astype(np.uint16)
        pieces.append(image)
        offsets[t + 1] = offsets[t] + len(image)
    out = np.concatenate(pieces) if pieces else np.empty(0, dtype=np.uint16)
    return out, offsets


def reflect_sets(words, offsets, n: int):
    """Reflect every set of a concatenated batch; same offsets on output."""
    w = np.asarray(words, dtype=np.uint32)
    offs = np.asarray(offsets, dtype=np.int64)
    y = np.zeros_like(w)
    for i in range(n):
        y |= ((w >> i) & 1) << (n - 1 - i)
    y = (~y) & np.uint32((1 << n) - 1)
    out = np.empty(len(w), dtype=np.uint16)
    for t in range(len(offs) - 1):
        s, e = offs[t], offs[t + 1]
        out[s:e] = np.sort(y[s:e])
    return out
