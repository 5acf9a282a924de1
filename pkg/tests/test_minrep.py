import numpy as np
import pytest

from conftest import random_network
from snfilter.levels import all_levels, nonempty_levels
from snfilter.minrep import (
    Dataset,
    close_under_reflection,
    find_min_rep_perm,
    min_rep_perm_refl,
    reduce_dataset,
)
from snfilter.model import (
    Level,
    Network,
    OutputSet,
    Permutation,
    all_inputs,
    output_set,
    permute_set,
    reflect_set,
    sorted_inputs,
)
from snfilter.pipeline import compute_R, extend
from snfilter.subsume import embeds, find_embedding


def one_level(n, pairs):
    return Network((Level.of(pairs, n),), n)


def dataset_of(n, nets):
    return Dataset(n, list(nets), [output_set(c, all_inputs(n)) for c in nets])


def test_close_already_closed():
    n = 4
    a, b = one_level(n, [(1, 2)]), one_level(n, [(3, 4)])
    data = dataset_of(n, [a, b])
    closed, reflect = close_under_reflection(data)
    assert len(closed) == 2 and reflect.tolist() == [1, 0]


def test_close_single_record():
    data = dataset_of(4, [one_level(4, [(1, 2)])])
    closed, reflect = close_under_reflection(data)
    assert len(closed) == 2
    assert closed.sets[1] == reflect_set(closed.sets[0])
    assert closed.networks[1] == one_level(4, [(3, 4)])
    assert reflect.tolist() == [1, 0]


def test_close_self_reflective():
    data = dataset_of(4, [one_level(4, [(1, 2), (3, 4)])])
    closed, reflect = close_under_reflection(data)
    assert len(closed) == 1 and reflect.tolist() == [0]


def test_reflect_is_involution(rng):
    n = 6
    data = dataset_of(n, [random_network(rng, n, 2) for _ in range(40)])
    red = reduce_dataset(data)
    r = red.reflect
    assert (r[r] == np.arange(len(r))).all()


def test_subset_of_equivalent_pair():
    s = output_set(one_level(4, [(1, 2)]), all_inputs(4))
    t = permute_set(Permutation((3, 4, 1, 2)), s)
    data = Dataset(4, [Network.empty(4)] * 2, [s, t])
    assert find_min_rep_perm(data).tolist() == [0, 0]


def test_subset_of_proper_subset():
    n = 4
    t = sorted_inputs(n).words.tolist()
    a = OutputSet.from_words(t + [0b0001], n)
    b = OutputSet.from_words(t + [0b0001, 0b0010], n)
    data = Dataset(n, [Network.empty(n)] * 2, [a, b])
    assert find_min_rep_perm(data).tolist() == [0, 0]


def test_subset_of_contract(rng):
    n = 6
    data = extend(compute_R(n, 1), all_levels(n))
    sub = find_min_rep_perm(data)
    for i, j in enumerate(sub.tolist()):
        if j == i:
            continue
        assert find_embedding(data.sets[j], data.sets[i]) is not None
        assert sub[j] == j  # points at a fixed point
        # least witness among all fixed points
        fixed = [k for k in range(len(data)) if sub[k] == k]
        first = next(k for k in fixed if embeds(data.sets[k], data.sets[i]))
        assert first == j


def test_minimal_records_not_subsumed():
    n = 6
    data = extend(compute_R(n, 1), all_levels(n))
    sub = find_min_rep_perm(data)
    fixed = [i for i in range(len(data)) if sub[i] == i]
    for i in fixed:
        for j in fixed:
            if j < i:
                assert not embeds(data.sets[j], data.sets[i])
            elif j > i:
                assert not (embeds(data.sets[j], data.sets[i]) and len(data.sets[j]) < len(data.sets[i]))


@pytest.mark.parametrize("n", range(5, 9))
def test_first_level_single_class(n):
    nets = [Network((lv,), n) for lv in nonempty_levels(n)]
    out = min_rep_perm_refl(dataset_of(n, nets))
    assert len(out) == 1
    assert out.networks[0].levels[0] == Level.of([(2 * k + 1, 2 * k + 2) for k in range(n // 2)], n)


def test_self_reflective_kept():
    data = dataset_of(4, [one_level(4, [(1, 2), (3, 4)])])
    assert len(min_rep_perm_refl(data)) == 1


def test_r92():
    assert len(compute_R(9, 2)) == 22


def test_idempotent():
    for n in (5, 6, 7):
        r = compute_R(n, 2).records
        assert min_rep_perm_refl(r) == r


@pytest.mark.parametrize("threads", [1, 2, 8])
def test_thread_determinism(threads):
    n = 7
    data = extend(compute_R(n, 2), all_levels(n))
    base = reduce_dataset(data, 1)
    got = reduce_dataset(data, threads)
    assert (got.subset_of == base.subset_of).all()
    assert got.result() == base.result()


def test_discarded_records_have_witness():
    n = 6
    data = extend(compute_R(n, 1), all_levels(n))
    red = reduce_dataset(data)
    kept = set(red.kept.tolist())
    for i in range(len(red.closed)):
        if i in kept:
            continue
        if red.subset_of[i] != i:
            assert embeds(red.closed.sets[red.subset_of[i]], red.closed.sets[i])
            continue
        item = red.reflect[i]
        while red.subset_of[item] != item:
            item = red.subset_of[item]
        assert item < i
        # the survivor at the end of the chain embeds into the reflection
        assert embeds(red.closed.sets[item], reflect_set(red.closed.sets[i]))


def test_duplicates_removed():
    n = 5
    c = one_level(n, [(1, 2)])
    data = dataset_of(n, [c, c, c])
    red = reduce_dataset(data)
    assert red.source.tolist()[:1] == [0]
    assert len(red.result()) == 1
