import os

import numpy as np
import pytest

from snfilter.levels import iter_level_pairs
from snfilter.model import Level, Network, OutputSet

EXTENDED = os.environ.get("SNFILTER_EXTENDED") == "1"


def pytest_collection_modifyitems(config, items):
    if EXTENDED:
        return
    skip = pytest.mark.skip(reason="extended run; set SNFILTER_EXTENDED=1")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


def batcher(n: int) -> Network:
    """Odd-even merge sort, one level per (p, k) step."""
    levels = []
    p = 1
    while p < n:
        k = p
        while k >= 1:
            pairs = []
            for j in range(k % p, n - k, 2 * k):
                for i in range(min(k, n - j - k)):
                    if (i + j) // (2 * p) == (i + j + k) // (2 * p):
                        pairs.append((i + j + 1, i + j + k + 1))
            levels.append(Level.of(pairs, n))
            k //= 2
        p *= 2
    return Network(tuple(levels), n)


def random_level(rng: np.random.Generator, n: int) -> Level:
    chans = list(rng.permutation(n) + 1)
    pairs = []
    while len(chans) >= 2 and rng.random() < 0.8:
        a, b = chans.pop(), chans.pop()
        pairs.append((min(a, b), max(a, b)))
    return Level.of(pairs, n)


def random_network(rng: np.random.Generator, n: int, depth: int) -> Network:
    return Network(tuple(random_level(rng, n) for _ in range(depth)), n)


def random_set(rng: np.random.Generator, n: int, size: int | None = None) -> OutputSet:
    if size is None:
        size = int(rng.integers(0, (1 << n) + 1))
    words = rng.choice(1 << n, size=min(size, 1 << n), replace=False)
    return OutputSet.from_words(words, n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def levels_by_n():
    return {n: [Level.of(p, n) for p in iter_level_pairs(n)] for n in range(2, 7)}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import summary_lines
    except ImportError:
        return
    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
