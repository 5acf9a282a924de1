"""Existence of a channel permutation p with p(S_A) a subset of S_B."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .model import OutputSet, Permutation, UsageError, permute_set

BRUTE_FORCE_MAX_N = 8


@dataclass(frozen=True)
class SetSignature:
    """Permutation-invariant counts used to prune the search.

    ``channel_profile[i, k]`` counts weight-k vectors with a 1 on channel i+1.
    """

    weight_hist: np.ndarray
    channel_profile: np.ndarray

    def dominated_by(self, other: SetSignature) -> bool:
        return bool(np.all(self.weight_hist <= other.weight_hist))


def signature(s: OutputSet) -> SetSignature:
    n = s.n
    w = s.words.astype(np.int64)
    bits = (w[:, None] >> np.arange(n)) & 1
    weights = bits.sum(axis=1)
    hist = np.bincount(weights, minlength=n + 1)
    onehot = weights[:, None] == np.arange(n + 1)
    profile = bits.T @ onehot.astype(np.int64)
    return SetSignature(hist, profile)


def _check_pair(a: OutputSet, b: OutputSet) -> None:
    if a.n != b.n:
        raise UsageError(f"sets over different channel counts ({a.n} vs {b.n})")


def find_embedding(a: OutputSet, b: OutputSet, *, backend: str | None = None) -> Permutation | None:
    """Some permutation mapping ``a`` into ``b``, or None if there is none."""
    _check_pair(a, b)
    image = kernels.get(backend).find_embedding(a.words, b.words, a.n)
    if image is None:
        return None
    perm = Permutation.from_zero_based(image)
    if not permute_set(perm, a).issubset(b):
        raise AssertionError("embedding search returned an invalid permutation")
    return perm


def embeds(a: OutputSet, b: OutputSet) -> bool:
    return find_embedding(a, b) is not None


@lru_cache(maxsize=None)
def _permutation_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All n! permutations (0-based images) and their action on every word."""
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    words = np.arange(1 << n, dtype=np.int64)
    bits = (words[None, :, None] >> np.arange(n)) & 1
    images = (bits << perms[:, None, :]).sum(axis=2).astype(np.int32)
    return perms, images


def brute_force_embedding(a: OutputSet, b: OutputSet) -> Permutation | None:
    """Exhaustive check over all n! permutations (n <= 8); returns the first hit
    in lexicographic permutation order."""
    _check_pair(a, b)
    if a.n > BRUTE_FORCE_MAX_N:
        raise UsageError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {a.n}")
    if len(a) == 0:
        return Permutation.identity(a.n)
    if len(a) > len(b):
        return None
    perms, images = _permutation_table(a.n)
    member = np.zeros(1 << a.n, dtype=bool)
    member[b.words.astype(np.int64)] = True
    ok = member[images[:, a.words.astype(np.int64)]].all(axis=1)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return None
    return Permutation.from_zero_based(perms[hits[0]].tolist())
