"""Filter-set pipeline: seed, extend by every level, reduce; repeat per depth."""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Callable

import numpy as np

from . import kernels
from .levels import (
    LevelCatalog,
    all_levels,
    max_comparator_level,
    maximal_first_level,
    nonempty_levels,
    telephone_number,
)
from .minrep import FULL, Dataset, Universe, min_rep_perm_refl
from .model import MAX_CHANNELS, Level, Network, OutputSet, UsageError, output_set

log = logging.getLogger(__name__)

# omega per n as used for the published restricted rows
DEFAULT_OMEGA = {5: 2, 6: 2, 7: 2, 8: 3, 9: 3, 10: 4, 11: 4, 12: 5, 13: 3, 14: 4, 15: 7, 16: 7}

# above this n the depth-1 reduction runs over one level per comparator count
# (all k-comparator levels are permutation-equivalent; the lexicographically
# least one represents its class)
DEPTH1_FULL_MAX_N = 8

DEFAULT_MEMORY_CAP = 3 * 2**30
MEMORY_CAP_ENV = "SNFILTER_MEMORY_CAP"
_RECORD_OVERHEAD = 1000


class ResourceGuardError(RuntimeError):
    """Refusing a run whose estimated footprint exceeds the configured cap."""


def parse_size(text: str) -> int:
    m = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*([kKmMgGtT]?)i?[bB]?\s*", text)
    if not m:
        raise ValueError(f"bad size {text!r}")
    scale = {"": 1, "k": 2**10, "m": 2**20, "g": 2**30, "t": 2**40}[m.group(2).lower()]
    return int(float(m.group(1)) * scale)


def memory_cap(explicit: int | None = None) -> int:
    """Flag value wins, then the environment, then the default."""
    if explicit is not None:
        return explicit
    env = os.environ.get(MEMORY_CAP_ENV)
    return parse_size(env) if env else DEFAULT_MEMORY_CAP


@dataclass
class FilterSet:
    n: int
    depth: int
    universe: Universe = FULL
    records: Dataset = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.records is None:
            self.records = Dataset(self.n, universe=self.universe)
        for net in self.records.networks:
            if net.depth != self.depth:
                raise UsageError(f"network of depth {net.depth} in a depth-{self.depth} filter set")

    def __len__(self) -> int:
        return len(self.records)


def estimate_extend_bytes(prefixes: Dataset, n_levels: int) -> int:
    words = sum(len(s) for s in prefixes.sets) * n_levels
    records = len(prefixes) * n_levels
    # x2: reflection closure may double the candidate set
    return 2 * (2 * words + _RECORD_OVERHEAD * records)


def _guard(estimate: int, cap: int, what: str) -> None:
    if estimate > cap:
        raise ResourceGuardError(
            f"{what}: estimated {estimate / 2**20:.0f} MiB exceeds cap {cap / 2**20:.0f} MiB"
        )


def extend(
    prefixes: FilterSet | Dataset,
    levels: LevelCatalog,
    *,
    backend: str | None = None,
    cap: int | None = None,
) -> Dataset:
    """Append every nonempty level to every prefix (prefix-major order).

    Output sets are carried forward incrementally: the child's set is the
    level applied to the parent's set.
    """
    data = prefixes.records if isinstance(prefixes, FilterSet) else prefixes
    if levels.n != data.n:
        raise UsageError(f"level catalog for n={levels.n}, prefixes for n={data.n}")
    lv = [level for level in levels if len(level)]
    _guard(estimate_extend_bytes(data, len(lv)), memory_cap(cap), "extend")
    cat = LevelCatalog(levels.n, tuple(lv))
    lo, hi, offs = cat.packed
    kern = kernels.get(backend)
    out = Dataset(data.n, universe=data.universe)
    for net, s in data:
        flat, bounds = kern.apply_levels(s.words, data.n, lo, hi, offs)
        for t, level in enumerate(lv):
            child = flat[bounds[t]:bounds[t + 1]]
            out.append(Network(net.levels + (level,), net.n), OutputSet(child, data.n, trusted=True))
    return out


def _depth1_candidates(n: int, universe: Universe) -> Dataset:
    inputs = universe.inputs(n)
    if n <= DEPTH1_FULL_MAX_N:
        levels = list(nonempty_levels(n))
    else:
        levels = [max_comparator_level(n, k) for k in range(1, n // 2 + 1)]
    data = Dataset(n, universe=universe)
    for level in levels:
        net = Network((level,), n)
        data.append(net, output_set(net, inputs))
    return data


def _check_args(n: int, depth: int) -> None:
    if not 2 <= n <= MAX_CHANNELS:
        raise UsageError(f"n must be in 2..{MAX_CHANNELS}, got {n}")
    if not 1 <= depth <= 3:
        raise UsageError(f"depth must be 1, 2 or 3, got {depth}")


Progress = Callable[[str], None]


def _reduce_stage(cands: Dataset, threads: int, backend, progress: Progress | None, label: str) -> Dataset:
    if progress:
        progress(f"{label}: {len(cands)} candidates")
    tick = None
    if progress:
        tick = lambda done, total: progress(f"{label}: reduced {done}/{total}")  # noqa: E731
    reduced = min_rep_perm_refl(cands, threads, backend=backend, progress=tick)
    if progress:
        progress(f"{label}: {len(reduced)} representatives")
    return reduced


def deepen(
    current: FilterSet,
    depth: int,
    levels: LevelCatalog | None = None,
    *,
    threads: int = 1,
    backend: str | None = None,
    cap: int | None = None,
    progress: Progress | None = None,
) -> FilterSet:
    """Extend-and-reduce ``current`` until it reaches ``depth``."""
    _check_args(current.n, depth)
    if depth < current.depth:
        raise UsageError(f"cannot deepen a depth-{current.depth} filter set to {depth}")
    if depth > current.depth and levels is None:
        levels = all_levels(current.n)
    tag = "" if current.universe.omega is None else f"|{current.universe.omega}"
    for d in range(current.depth + 1, depth + 1):
        cands = extend(current, levels, backend=backend, cap=cap)
        reduced = _reduce_stage(cands, threads, backend, progress, f"R({current.n},{d}){tag}")
        current = FilterSet(current.n, d, current.universe, reduced)
    return current


def compute_R(
    n: int,
    depth: int,
    levels: LevelCatalog | None = None,
    *,
    threads: int = 1,
    backend: str | None = None,
    cap: int | None = None,
    progress: Progress | None = None,
) -> FilterSet:
    """Representatives of depth-``depth`` prefixes over all inputs."""
    _check_args(n, depth)
    reduced = _reduce_stage(_depth1_candidates(n, FULL), threads, backend, progress, f"R({n},1)")
    first = FilterSet(n, 1, FULL, reduced)
    return deepen(first, depth, levels, threads=threads, backend=backend, cap=cap, progress=progress)


def omega_seed(n: int, omega: int) -> FilterSet:
    """The maximal first level evaluated over the restricted inputs."""
    universe = Universe(omega)
    net = Network((maximal_first_level(n),), n)
    data = Dataset(n, [net], [output_set(net, universe.inputs(n))], universe)
    return FilterSet(n, 1, universe, data)


def compute_R_omega(
    n: int,
    depth: int,
    omega: int | None = None,
    levels: LevelCatalog | None = None,
    *,
    threads: int = 1,
    backend: str | None = None,
    cap: int | None = None,
    progress: Progress | None = None,
) -> FilterSet:
    """Representatives over the restricted input universe."""
    _check_args(n, depth)
    if omega is None:
        omega = DEFAULT_OMEGA.get(n, 0)
    if not 0 <= omega <= n:
        raise UsageError(f"omega must be in 0..{n}, got {omega}")
    seed = omega_seed(n, omega)
    return deepen(seed, depth, levels, threads=threads, backend=backend, cap=cap, progress=progress)


def ratio(numerator: int, denominator: int) -> Fraction:
    if denominator <= 0:
        raise UsageError("ratio denominator must be positive")
    return Fraction(numerator, denominator)


def format_ratio(value: Fraction) -> str:
    """Two decimals, half-up on the exact rational."""
    q = Decimal(value.numerator) / Decimal(value.denominator)
    return str(q.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class SpeedupRow:
    n: int
    levels: int
    r2: int
    r3: int | None = None
    r3_omega: int | None = None
    r2_omega: int | None = None

    @property
    def speedup(self) -> Fraction | None:
        return None if self.r3 is None else ratio(self.r2 * self.levels, self.r3)

    @property
    def speedup_omega(self) -> Fraction | None:
        return None if self.r3_omega is None else ratio(self.r2 * self.levels, self.r3_omega)

    @property
    def restriction_gain(self) -> Fraction | None:
        return None if self.r2_omega is None else ratio(self.r2, self.r2_omega)


def speedup_table(
    n: int,
    r2: int | None,
    r3: int | None = None,
    r3_omega: int | None = None,
    r2_omega: int | None = None,
) -> SpeedupRow:
    """Speedup of fixing three levels instead of two: |R2|*|G_n| / |R3|."""
    if r2 is None:
        raise UsageError("speedup needs |R(n,2)|")
    if r3 is None and r3_omega is None:
        raise UsageError("speedup needs |R(n,3)| or its restricted variant")
    return SpeedupRow(n, telephone_number(n), r2, r3, r3_omega, r2_omega)


def sizes(data: Dataset) -> np.ndarray:
    return np.fromiter((len(s) for s in data.sets), dtype=np.int64, count=len(data))
