"""Exhaustive suffix search: does a prefix extend to a sorter within k more levels?"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .levels import LevelCatalog, nonempty_levels
from .model import Network, OutputSet, UsageError, is_sorting_network, output_set
from .pipeline import FilterSet, ResourceGuardError

DEFAULT_MAX_NODES = 10**9

Suffix = tuple[int, ...]  # indices into the level catalog


class SearchMemo:
    """Thread-safe map (set bytes, remaining depth) -> suffix or None."""

    def __init__(self) -> None:
        self._data: dict[tuple[bytes, int], Suffix | None] = {}
        self._lock = threading.Lock()
        self.hits = 0

    def get(self, key: tuple[bytes, int]) -> tuple[bool, Suffix | None]:
        with self._lock:
            if key in self._data:
                self.hits += 1
                return True, self._data[key]
            return False, None

    def put(self, key: tuple[bytes, int], value: Suffix | None) -> None:
        with self._lock:
            self._data[key] = value

    def __len__(self) -> int:
        return len(self._data)


def sorted_mask(words: np.ndarray, n: int) -> np.ndarray:
    w = words.astype(np.int64)
    return (w == 0) | (w + (w & -w) == 1 << n)


class _Searcher:
    def __init__(self, n: int, levels: LevelCatalog, memo: SearchMemo | None, backend: str | None) -> None:
        self.n = n
        self.levels = [lv for lv in levels if len(lv)]
        self.cat = LevelCatalog(n, tuple(self.levels))
        self.packed = self.cat.packed
        self.kern = kernels.get(backend)
        self.memo = memo

    def children(self, words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lo, hi, offs = self.packed
        return self.kern.apply_levels(words, self.n, lo, hi, offs)

    def solve(self, words: np.ndarray, k: int) -> Suffix | None:
        if sorted_mask(words, self.n).all():
            return ()
        if k == 0:
            return None
        key = (words.tobytes(), k)
        if self.memo is not None:
            found, value = self.memo.get(key)
            if found:
                return value
        result = self._expand(words, k)
        if self.memo is not None:
            self.memo.put(key, result)
        return result

    def _expand(self, words: np.ndarray, k: int) -> Suffix | None:
        flat, bounds = self.children(words)
        if k == 1:
            ok = sorted_mask(flat, self.n)
            # children are never empty, so reduceat is safe
            good = np.logical_and.reduceat(ok, bounds[:-1])
            hits = np.flatnonzero(good)
            return (int(hits[0]),) if hits.size else None
        parent = words.tobytes()
        seen: set[bytes] = set()
        for t in range(len(self.levels)):
            child = flat[bounds[t]:bounds[t + 1]]
            raw = child.tobytes()
            # a level that fixes the set, or repeats a sibling, adds nothing
            if raw == parent or raw in seen:
                continue
            seen.add(raw)
            tail = self.solve(child, k - 1)
            if tail is not None:
                return (t,) + tail
        return None

    def network(self, suffix: Suffix) -> Network:
        return Network(tuple(self.levels[t] for t in suffix), self.n)


def dfs_extend(
    s: OutputSet,
    k: int,
    levels: LevelCatalog | None = None,
    memo: SearchMemo | None = None,
    *,
    backend: str | None = None,
) -> Network | None:
    """A suffix of at most ``k`` nonempty levels that sorts every vector of
    ``s``, or None when no such suffix exists."""
    if k < 0:
        raise UsageError("depth budget must be >= 0")
    if levels is None:
        levels = nonempty_levels(s.n)
    searcher = _Searcher(s.n, levels, memo, backend)
    suffix = searcher.solve(s.words, k)
    return None if suffix is None else searcher.network(suffix)


@dataclass
class PrefixVerdict:
    index: int
    prefix: Network
    suffix: Network | None

    @property
    def extends(self) -> bool:
        return self.suffix is not None


@dataclass
class ProofResult:
    n: int
    target_depth: int
    universe: str
    exists: bool
    witness: Network | None
    table: list[PrefixVerdict] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "exists" if self.exists else "not-exists"


def search_space(filters: FilterSet, target_depth: int) -> int:
    branching = sum(1 for lv in nonempty_levels(filters.n))
    return len(filters) * branching ** max(0, target_depth - filters.depth - 1)


def _check_witness(witness: Network, filters: FilterSet) -> None:
    if filters.universe.omega is None:
        ok = is_sorting_network(witness)
    else:
        out = output_set(witness, filters.universe.inputs(filters.n))
        ok = bool(sorted_mask(out.words, filters.n).all())
    if not ok:
        raise AssertionError(f"witness {witness.key} does not sort its input universe")


def prove_filter_complete(
    filters: FilterSet,
    target_depth: int,
    *,
    threads: int = 1,
    memo: SearchMemo | None = None,
    use_memo: bool = True,
    max_nodes: int = DEFAULT_MAX_NODES,
    backend: str | None = None,
) -> ProofResult:
    """Search every prefix of ``filters`` for a completion to ``target_depth``.

    The verdict is "exists" iff some prefix extends; the first such prefix
    (in file order) supplies the witness, which is re-checked against the
    whole input universe before it is returned.
    """
    if target_depth < filters.depth:
        raise UsageError(f"target depth {target_depth} below filter depth {filters.depth}")
    if threads < 1:
        raise UsageError("threads must be >= 1")
    estimate = search_space(filters, target_depth)
    if estimate > max_nodes:
        raise ResourceGuardError(f"verify: about {estimate:.3g} search nodes exceeds limit {max_nodes:.3g}")
    if memo is None and use_memo:
        memo = SearchMemo()
    k = target_depth - filters.depth
    searcher = _Searcher(filters.n, nonempty_levels(filters.n), memo, backend)
    data = filters.records

    def run(i: int) -> PrefixVerdict:
        suffix = searcher.solve(data.sets[i].words, k)
        return PrefixVerdict(i, data.networks[i], None if suffix is None else searcher.network(suffix))

    if threads == 1:
        table = [run(i) for i in range(len(data))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            table = list(pool.map(run, range(len(data))))

    witness = None
    for row in table:
        if row.extends:
            witness = row.prefix + row.suffix
            _check_witness(witness, filters)
            break
    return ProofResult(filters.n, target_depth, filters.universe.tag, witness is not None, witness, table)
