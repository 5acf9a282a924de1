"""Minimal representatives up to permutation, and up to permutation and reflection.

A record is minimal up to permutation when no other record's set embeds into
its set, except equivalent ones (mutual embedding) of larger index.  Ties
between equivalent records always go to the smallest dataset index, which
keeps ``subset_of`` chains well founded.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from . import kernels
from .model import (
    Network,
    OutputSet,
    UsageError,
    all_inputs,
    reflect_network,
    restricted_inputs,
)

log = logging.getLogger(__name__)

BATCH = 256


@dataclass(frozen=True)
class Universe:
    """Input universe of a dataset: all of I_n, or the restricted set B|omega."""

    omega: int | None = None

    @property
    def tag(self) -> str:
        return "full" if self.omega is None else f"omega:{self.omega}"

    @classmethod
    def parse(cls, tag: str) -> Universe:
        if tag == "full":
            return cls()
        if tag.startswith("omega:"):
            try:
                return cls(int(tag[6:]))
            except ValueError:
                pass
        raise ValueError(f"bad universe tag {tag!r}")

    def inputs(self, n: int) -> OutputSet:
        return all_inputs(n) if self.omega is None else restricted_inputs(n, self.omega)

    def __str__(self) -> str:
        return self.tag


FULL = Universe()


@dataclass
class Dataset:
    """Ordered (network, output set) records; order is the tie-break order."""

    n: int
    networks: list[Network] = field(default_factory=list)
    sets: list[OutputSet] = field(default_factory=list)
    universe: Universe = FULL

    def __post_init__(self) -> None:
        if len(self.networks) != len(self.sets):
            raise UsageError("networks and sets differ in length")

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self) -> Iterator[tuple[Network, OutputSet]]:
        return zip(self.networks, self.sets)

    @property
    def records(self) -> list[tuple[Network, OutputSet]]:
        return list(zip(self.networks, self.sets))

    def append(self, network: Network, s: OutputSet) -> None:
        self.networks.append(network)
        self.sets.append(s)

    def subset(self, indices: Sequence[int]) -> Dataset:
        return Dataset(
            self.n,
            [self.networks[i] for i in indices],
            [self.sets[i] for i in indices],
            self.universe,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.n == other.n
            and self.universe == other.universe
            and self.networks == other.networks
            and self.sets == other.sets
        )


def _words_of(sets: Sequence[OutputSet]) -> list[np.ndarray]:
    return [s.words for s in sets]


def first_occurrence(words: Sequence[np.ndarray]) -> np.ndarray:
    """``first[i]`` is the least index holding a set identical to set i."""
    first = np.arange(len(words), dtype=np.int64)
    buckets: dict[int, list[int]] = {}
    for i, w in enumerate(words):
        bucket = buckets.setdefault(hash(w.tobytes()), [])
        for j in bucket:
            if np.array_equal(words[j], w):
                first[i] = j
                break
        else:
            bucket.append(i)
    return first


def close_under_reflection(data: Dataset, *, backend: str | None = None) -> tuple[Dataset, np.ndarray]:
    """Append the reflection of every record whose reflected set is missing.

    Returns the closed dataset and ``reflect`` with ``sets[reflect[i]]`` equal
    to the reflection of ``sets[i]`` (least such index when the input holds
    duplicate sets; an involution otherwise).
    """
    n = data.n
    r = len(data)
    out = Dataset(n, list(data.networks), list(data.sets), data.universe)
    if r == 0:
        return out, np.zeros(0, dtype=np.int64)
    words = _words_of(data.sets)
    offsets = np.zeros(r + 1, dtype=np.int64)
    np.cumsum([len(w) for w in words], out=offsets[1:])
    flat = np.concatenate(words) if offsets[-1] else np.zeros(0, dtype=np.uint16)
    reflected = kernels.get(backend).reflect_sets(flat, offsets, n)

    index: dict[int, list[int]] = {}

    def lookup(w: np.ndarray) -> int:
        for j in index.get(hash(w.tobytes()), ()):
            if np.array_equal(out.sets[j].words, w):
                return j
        return -1

    for i, w in enumerate(words):
        key = hash(w.tobytes())
        if not any(np.array_equal(out.sets[j].words, w) for j in index.get(key, ())):
            index.setdefault(key, []).append(i)

    reflect = np.full(r, -1, dtype=np.int64)
    extra: list[int] = []
    for i in range(r):
        rw = reflected[offsets[i]:offsets[i + 1]]
        j = lookup(rw)
        if j < 0:
            j = len(out)
            out.append(reflect_network(data.networks[i]), OutputSet(rw, n, trusted=True))
            index.setdefault(hash(rw.tobytes()), []).append(j)
            extra.append(i)
        reflect[i] = j
    return out, np.concatenate([reflect, np.array(extra, dtype=np.int64)])


def _subset_of_words(
    words: Sequence[np.ndarray],
    n: int,
    threads: int = 1,
    backend: str | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> np.ndarray:
    kern = kernels.get(backend)
    r = len(words)
    subset_of = np.arange(r, dtype=np.int64)
    first = first_occurrence(words)
    sizes = np.fromiter((len(w) for w in words), dtype=np.int64, count=r)
    # a proper subsumer is strictly smaller; an equivalent one is equal-sized
    # with a smaller index, so every candidate witness precedes i in this order
    order = [int(i) for i in np.lexsort((np.arange(r), sizes)) if first[i] == i]
    bank = kern.SetBank(n)

    if threads <= 1:
        for done, i in enumerate(order, 1):
            hit = bank.first_subsumer(words[i])
            if hit < 0:
                bank.add(words[i], i)
            else:
                subset_of[i] = hit
            if progress and done % 4096 == 0:
                progress(done, len(order))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for start in range(0, len(order), BATCH):
                chunk = order[start:start + BATCH]
                mark = len(bank)
                hits = list(pool.map(bank.first_subsumer, [words[i] for i in chunk]))
                for i, hit in zip(chunk, hits):
                    # entries added earlier in this batch were not visible to
                    # the parallel pass; merge so the least key still wins
                    if len(bank) > mark:
                        late = bank.first_subsumer(words[i], mark)
                        if late >= 0 and (hit < 0 or late < hit):
                            hit = late
                    if hit < 0:
                        bank.add(words[i], i)
                    else:
                        subset_of[i] = hit
                if progress:
                    progress(min(start + BATCH, len(order)), len(order))

    for i in range(r):
        if first[i] != i:
            subset_of[i] = subset_of[first[i]]
    return subset_of


def find_min_rep_perm(
    data: Dataset,
    threads: int = 1,
    *,
    backend: str | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> np.ndarray:
    """``subset_of`` array: i for records minimal up to permutation, else the
    smallest index of a minimal record whose set embeds into record i."""
    if threads < 1:
        raise UsageError("threads must be >= 1")
    return _subset_of_words(_words_of(data.sets), data.n, threads, backend, progress)


@dataclass
class Reduction:
    """Full bookkeeping of one reflection-aware reduction."""

    closed: Dataset
    source: np.ndarray
    reflect: np.ndarray
    subset_of: np.ndarray
    is_min_pi: np.ndarray
    is_min_refl: np.ndarray

    @property
    def kept(self) -> np.ndarray:
        return np.flatnonzero(self.is_min_pi & self.is_min_refl)

    def result(self) -> Dataset:
        return self.closed.subset(self.kept.tolist())


def reduce_dataset(
    data: Dataset,
    threads: int = 1,
    *,
    backend: str | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> Reduction:
    """Reflection-aware reduction with all intermediate arrays.

    Exact duplicate sets are dropped first (the earliest copy stays); the
    ``source`` array maps closed-dataset positions back to input indices, -1
    for appended reflections.
    """
    first = first_occurrence(_words_of(data.sets))
    unique = np.flatnonzero(first == np.arange(len(data)))
    closed, reflect = close_under_reflection(data.subset(unique.tolist()), backend=backend)
    source = np.concatenate([unique, np.full(len(closed) - len(unique), -1, dtype=np.int64)])
    subset_of = find_min_rep_perm(closed, threads, backend=backend, progress=progress)

    size = len(closed)
    is_min_pi = np.zeros(size, dtype=bool)
    is_min_refl = np.zeros(size, dtype=bool)
    for i in range(size):
        if subset_of[i] == i:
            is_min_pi[i] = True
            item = reflect[i]
            while subset_of[item] != item:
                item = subset_of[item]
            is_min_refl[i] = not item < i
    return Reduction(closed, source, reflect, subset_of, is_min_pi, is_min_refl)


def min_rep_perm_refl(
    data: Dataset,
    threads: int = 1,
    *,
    backend: str | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> Dataset:
    """Records minimal and representative up to permutation and reflection."""
    return reduce_dataset(data, threads, backend=backend, progress=progress).result()
