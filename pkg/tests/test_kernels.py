import numpy as np
import pytest

from conftest import random_set
from snfilter import kernels
from snfilter.levels import nonempty_levels
from snfilter.model import all_inputs, apply_level_words, reflect_words

BACKENDS = sorted(kernels.available())
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")


def test_active_backend_reported():
    assert kernels.BACKEND in BACKENDS
    assert kernels.get().BACKEND == kernels.BACKEND


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get("fortran")


@pytest.mark.parametrize("backend", BACKENDS)
def test_apply_levels_matches_model(backend, rng):
    mod = kernels.get(backend)
    for n in (3, 5, 7):
        cat = nonempty_levels(n)
        lo, hi, offs = cat.packed
        s = random_set(rng, n, 1 << (n - 1))
        flat, bounds = mod.apply_levels(s.words, n, lo, hi, offs)
        for t, lv in enumerate(cat):
            want = np.unique(apply_level_words(s.words, lv))
            assert flat[bounds[t]:bounds[t + 1]].tolist() == want.tolist()


@pytest.mark.parametrize("backend", BACKENDS)
def test_reflect_sets(backend, rng):
    mod = kernels.get(backend)
    sets = [random_set(rng, 6) for _ in range(20)]
    offs = np.cumsum([0] + [len(s) for s in sets])
    flat = np.concatenate([s.words for s in sets])
    out = mod.reflect_sets(flat, offs, 6)
    for i, s in enumerate(sets):
        assert out[offs[i]:offs[i + 1]].tolist() == reflect_words(s.words, 6).tolist()


@pytest.mark.parametrize("backend", BACKENDS)
def test_setbank_least_key(backend):
    mod = kernels.get(backend)
    bank = mod.SetBank(3)
    full = all_inputs(3).words
    bank.add(np.array([0, 7], dtype=np.uint16), 5)
    bank.add(np.array([0, 1, 7], dtype=np.uint16), 2)
    assert len(bank) == 2
    assert bank.first_subsumer(full) == 2
    assert bank.first_subsumer(np.array([0, 7], dtype=np.uint16)) == 5
    assert bank.first_subsumer(np.array([1], dtype=np.uint16)) == -1


@needs_both
def test_backends_agree_on_embeddings(rng):
    c, p = kernels.get("cython"), kernels.get("python")
    for _ in range(2000):
        n = int(rng.integers(1, 9))
        a = random_set(rng, n, int(rng.integers(0, 1 << (n - 1))))
        b = random_set(rng, n)
        ra = c.find_embedding(a.words, b.words, n)
        rb = p.find_embedding(a.words, b.words, n)
        assert (ra is None) == (rb is None)


@needs_both
def test_backends_agree_on_pipeline(monkeypatch):
    from snfilter.pipeline import compute_R
    a = compute_R(7, 3, backend="cython")
    b = compute_R(7, 3, backend="python")
    assert a.records == b.records
