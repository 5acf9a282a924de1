"""Comparator networks on binary inputs.

Channel ``i`` (1-based) of an n-channel binary vector is bit ``i - 1`` of its
integer word.  Every serialized or hashed form in the package depends on this
encoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

MAX_CHANNELS = 16


class UsageError(ValueError):
    """Invalid arguments to a model operation (channel mismatch, bad range)."""


def _check_n(n: int, lo: int = 1) -> None:
    if not lo <= n <= MAX_CHANNELS:
        raise UsageError(f"channel count must be in {lo}..{MAX_CHANNELS}, got {n}")


class Comparator(NamedTuple):
    lo: int
    hi: int


@dataclass(frozen=True)
class Level:
    """A set of channel-disjoint min-max comparators, kept sorted."""

    comparators: tuple[Comparator, ...]
    n: int

    def __post_init__(self) -> None:
        _check_n(self.n)
        comps = tuple(sorted(Comparator(int(c[0]), int(c[1])) for c in self.comparators))
        seen: set[int] = set()
        for lo, hi in comps:
            if not 1 <= lo < hi <= self.n:
                raise UsageError(f"comparator <{lo},{hi}> invalid for n={self.n}")
            if lo in seen or hi in seen:
                raise UsageError(f"channel reused in level {comps}")
            seen.update((lo, hi))
        object.__setattr__(self, "comparators", comps)

    @classmethod
    def of(cls, pairs: Iterable[Sequence[int]], n: int) -> Level:
        return cls(tuple(Comparator(p[0], p[1]) for p in pairs), n)

    @property
    def key(self) -> tuple[tuple[int, int], ...]:
        return tuple(tuple(c) for c in self.comparators)

    def __len__(self) -> int:
        return len(self.comparators)

    def __iter__(self) -> Iterator[Comparator]:
        return iter(self.comparators)


@dataclass(frozen=True)
class Network:
    levels: tuple[Level, ...]
    n: int

    def __post_init__(self) -> None:
        _check_n(self.n)
        levels = tuple(self.levels)
        for lv in levels:
            if lv.n != self.n:
                raise UsageError(f"level on {lv.n} channels in a {self.n}-channel network")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def empty(cls, n: int) -> Network:
        return cls((), n)

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def key(self):
        """Lexicographic order: levels left to right, each by its comparator list."""
        return tuple(lv.key for lv in self.levels)

    def __len__(self) -> int:
        return len(self.levels)

    def __add__(self, other: Network | Level) -> Network:
        if isinstance(other, Level):
            other = Network((other,), other.n)
        return concat(self, other)


@dataclass(frozen=True)
class BitVector:
    word: int
    n: int

    def __post_init__(self) -> None:
        _check_n(self.n)
        if not 0 <= self.word < (1 << self.n):
            raise UsageError(f"word {self.word} does not fit {self.n} channels")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> BitVector:
        """Build from channel values listed channel 1 first."""
        return cls(sum((int(b) & 1) << i for i, b in enumerate(bits)), len(bits))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.word >> i) & 1 for i in range(self.n))

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class Permutation:
    """Bijection on channels; ``image[i - 1]`` is the image of channel i."""

    image: tuple[int, ...]

    def __post_init__(self) -> None:
        image = tuple(int(v) for v in self.image)
        if sorted(image) != list(range(1, len(image) + 1)):
            raise UsageError(f"not a permutation of 1..{len(image)}: {image}")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_zero_based(cls, image: Sequence[int]) -> Permutation:
        return cls(tuple(v + 1 for v in image))

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i - 1]

    def compose(self, other: Permutation) -> Permutation:
        """``self ∘ other``: apply other first."""
        if other.n != self.n:
            raise UsageError("permutation sizes differ")
        return Permutation(tuple(self.image[j - 1] for j in other.image))

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for i, j in enumerate(self.image, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))


class OutputSet:
    """Canonical set of n-channel binary vectors: strictly increasing words."""

    __slots__ = ("words", "n", "_hash")

    def __init__(self, words, n: int, *, trusted: bool = False) -> None:
        _check_n(n)
        arr = np.asarray(words)
        if not trusted:
            arr = arr.astype(np.int64, copy=False)
            if arr.ndim != 1:
                raise UsageError("output set words must be one-dimensional")
            if arr.size and (arr.min() < 0 or arr.max() >= (1 << n)):
                raise UsageError(f"word outside {n} channels")
            if arr.size > 1 and not np.all(arr[1:] > arr[:-1]):
                raise UsageError("output set words must be strictly increasing")
        arr = np.array(arr, dtype=np.uint16)
        arr.setflags(write=False)
        self.words = arr
        self.n = n
        self._hash = None

    @classmethod
    def from_words(cls, words: Iterable[int], n: int) -> OutputSet:
        """Canonicalize an arbitrary collection of words."""
        return cls(np.unique(np.fromiter((int(w) for w in words), dtype=np.int64)), n)

    def __len__(self) -> int:
        return int(self.words.size)

    def __iter__(self) -> Iterator[BitVector]:
        return (BitVector(int(w), self.n) for w in self.words)

    def __contains__(self, x: BitVector | int) -> bool:
        w = x.word if isinstance(x, BitVector) else int(x)
        i = int(np.searchsorted(self.words, w))
        return i < len(self.words) and int(self.words[i]) == w

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OutputSet):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.words, other.words)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.words.tobytes()))
        return self._hash

    def issubset(self, other: OutputSet) -> bool:
        return bool(np.isin(self.words, other.words, assume_unique=True).all())

    def __le__(self, other: OutputSet) -> bool:
        return self.issubset(other)

    def __repr__(self) -> str:
        return f"OutputSet(n={self.n}, size={len(self)})"


def _require_same_n(a: int, b: int, what: str) -> None:
    if a != b:
        raise UsageError(f"{what}: channel counts differ ({a} vs {b})")


def apply_level(x: BitVector, level: Level) -> BitVector:
    _require_same_n(x.n, level.n, "apply_level")
    y = x.word
    for lo, hi in level.comparators:
        p, q = lo - 1, hi - 1
        if (y >> p) & 1 and not (y >> q) & 1:
            y ^= (1 << p) | (1 << q)
    return BitVector(y, x.n)


def apply_level_words(words: np.ndarray, level: Level) -> np.ndarray:
    """Apply a level to an array of words (no canonicalization)."""
    y = np.asarray(words, dtype=np.uint32).copy()
    for lo, hi in level.comparators:
        p, q = lo - 1, hi - 1
        swap = ((y >> p) & 1) & (((y >> q) & 1) ^ 1)
        y ^= swap * np.uint32((1 << p) | (1 << q))
    return y


def evaluate(network: Network, x: BitVector) -> tuple[BitVector, Permutation]:
    """Value ``V_C(x)`` and origin permutation ``P_C(x)``.

    ``perm(i)`` is the input channel whose value ends on channel i; values
    that compare equal stay on their own channel.
    """
    _require_same_n(x.n, network.n, "evaluate")
    vals = list(x.bits)
    origin = list(range(1, x.n + 1))
    for level in network.levels:
        for lo, hi in level.comparators:
            i, j = lo - 1, hi - 1
            if vals[i] > vals[j]:
                vals[i], vals[j] = vals[j], vals[i]
                origin[i], origin[j] = origin[j], origin[i]
    return BitVector.from_bits(vals), Permutation(tuple(origin))


def output_set(network: Network, inputs: OutputSet | Iterable[BitVector]) -> OutputSet:
    if isinstance(inputs, OutputSet):
        _require_same_n(inputs.n, network.n, "output_set")
        words = inputs.words
    else:
        vecs = list(inputs)
        for v in vecs:
            _require_same_n(v.n, network.n, "output_set")
        words = np.array([v.word for v in vecs], dtype=np.uint32)
    y = np.asarray(words, dtype=np.uint32)
    for level in network.levels:
        y = apply_level_words(y, level)
    return OutputSet(np.unique(y), network.n, trusted=True)


def is_sorted_word(word: int, n: int) -> bool:
    # non-decreasing from channel 1 to n: zeros in the low bits, ones above
    return word == 0 or word + (word & -word) == 1 << n


def is_sorted(x: BitVector) -> bool:
    return is_sorted_word(x.word, x.n)


def is_sorting_network(network: Network) -> bool:
    return len(output_set(network, all_inputs(network.n))) == network.n + 1


def concat(a: Network, b: Network) -> Network:
    _require_same_n(a.n, b.n, "concat")
    return Network(a.levels + b.levels, a.n)


def reflect_word(word: int, n: int) -> int:
    rev = 0
    for i in range(n):
        if (word >> i) & 1:
            rev |= 1 << (n - 1 - i)
    return ~rev & ((1 << n) - 1)


def reflect_vector(x: BitVector) -> BitVector:
    return BitVector(reflect_word(x.word, x.n), x.n)


@lru_cache(maxsize=None)
def _reflect_table(n: int) -> np.ndarray:
    table = np.array([reflect_word(w, n) for w in range(1 << n)], dtype=np.uint16)
    table.setflags(write=False)
    return table


def reflect_words(words: np.ndarray, n: int) -> np.ndarray:
    """Canonical (sorted) reflection of a canonical word array."""
    return np.sort(_reflect_table(n)[np.asarray(words, dtype=np.int64)])


def reflect_set(s: OutputSet) -> OutputSet:
    return OutputSet(reflect_words(s.words, s.n), s.n, trusted=True)


def reflect_level(level: Level) -> Level:
    n = level.n
    return Level.of(((n - hi + 1, n - lo + 1) for lo, hi in level.comparators), n)


def reflect_network(network: Network) -> Network:
    return Network(tuple(reflect_level(lv) for lv in network.levels), network.n)


def permute_words(words: np.ndarray, perm: Permutation) -> np.ndarray:
    """Move channel i's bit to channel perm(i) in every word (unsorted)."""
    w = np.asarray(words, dtype=np.uint32)
    out = np.zeros_like(w)
    for i, j in enumerate(perm.image):
        out |= ((w >> i) & 1) << (j - 1)
    return out


def permute_vector(perm: Permutation, x: BitVector) -> BitVector:
    _require_same_n(perm.n, x.n, "permute_vector")
    y = 0
    for i, j in enumerate(perm.image):
        if (x.word >> i) & 1:
            y |= 1 << (j - 1)
    return BitVector(y, x.n)


def permute_set(perm: Permutation, s: OutputSet) -> OutputSet:
    _require_same_n(perm.n, s.n, "permute_set")
    return OutputSet(np.sort(permute_words(s.words, perm)), s.n, trusted=True)


def sorted_inputs(n: int) -> OutputSet:
    """T_n: the n + 1 sorted vectors."""
    _check_n(n)
    full = (1 << n) - 1
    return OutputSet(sorted(full ^ ((1 << k) - 1) for k in range(n + 1)), n, trusted=True)


def all_inputs(n: int) -> OutputSet:
    _check_n(n)
    return OutputSet(np.arange(1 << n), n, trusted=True)


def restricted_inputs(n: int, w: int) -> OutputSet:
    """Inputs whose first l channels are 0 and last r channels are 1, some l + r = w."""
    _check_n(n)
    if not 0 <= w <= n:
        raise UsageError(f"restriction width must be in 0..{n}, got {w}")
    words = np.arange(1 << n)
    keep = np.zeros(words.size, dtype=bool)
    for lead in range(w + 1):
        trail = w - lead
        low = (1 << lead) - 1
        high = ((1 << trail) - 1) << (n - trail)
        keep |= ((words & low) == 0) & ((words & high) == high)
    return OutputSet(words[keep], n, trusted=True)
