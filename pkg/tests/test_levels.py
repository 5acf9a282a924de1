import pytest

from snfilter.levels import (
    all_levels,
    count_levels,
    iter_level_pairs,
    max_comparator_level,
    maximal_first_level,
    nonempty_levels,
    telephone_number,
)
from snfilter.model import Level, UsageError

REF_G = {5: 26, 6: 76, 7: 232, 8: 764, 9: 2620, 10: 9496, 11: 35696, 12: 140152,
         13: 568504, 14: 2390480, 15: 10349536, 16: 46206736}


def test_small_catalogs():
    cat = all_levels(2)
    assert [lv.key for lv in cat] == [(), ((1, 2),)]
    assert [lv.key for lv in nonempty_levels(3)] == [((1, 2),), ((1, 3),), ((2, 3),)]


@pytest.mark.parametrize("n", range(1, 10))
def test_enumeration_matches_recurrence(n):
    assert count_levels(n) == telephone_number(n)


@pytest.mark.parametrize("n", sorted(REF_G))
def test_telephone_numbers(n):
    assert telephone_number(n) == REF_G[n]


def test_nonempty_counts():
    assert len(nonempty_levels(5)) == 25
    assert len(nonempty_levels(6)) == 75


@pytest.mark.parametrize("n", range(2, 9))
def test_order_and_uniqueness(n):
    keys = [tuple(p) for p in iter_level_pairs(n)]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)
    for k in keys:
        Level.of(k, n)  # validates disjointness


def test_maximal_first_level():
    assert maximal_first_level(4).key == ((1, 2), (3, 4))
    assert maximal_first_level(5).key == ((1, 2), (3, 4))
    assert len(maximal_first_level(16)) == 8
    assert max_comparator_level(7, 2).key == ((1, 2), (3, 4))


def test_range_checks():
    with pytest.raises(UsageError):
        all_levels(17)
    with pytest.raises(UsageError):
        maximal_first_level(1)


def test_packed_layout():
    lo, hi, offs = nonempty_levels(4).packed
    assert offs[0] == 0 and offs[-1] == len(lo) == len(hi)
    assert (lo < hi).all() and lo.min() == 0 and hi.max() == 3
