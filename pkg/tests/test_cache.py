"""
Unit tests for the memoization layer
"""

import pytest

from src.cache import MemoCache, get_cache_stats, memoized
from src.rootsys import enumerate_closed_sets


@pytest.fixture
def cache():
    return MemoCache(max_size=2)


def test_get_and_set(cache):
    assert cache.get('missing') is None
    assert cache.get('missing', 7) == 7
    cache.set('a', 1)
    assert cache.get('a') == 1
    stats = cache.get_stats()
    assert stats['hits'] == 1
    assert stats['misses'] == 2
    assert stats['hit_rate'] == '33.33%'


def test_least_recently_used_entry_is_evicted(cache):
    cache.set('a', 1)
    cache.set('b', 2)
    cache.get('a')
    cache.set('c', 3)
    assert cache.get('b') is None
    assert cache.get('a') == 1
    assert cache.get('c') == 3
    assert cache.get_stats()['size'] == 2


def test_delete_and_clear(cache):
    cache.set('a', 1)
    cache.delete('a')
    cache.delete('never-set')
    assert cache.get('a') is None
    cache.set('b', 2)
    cache.clear()
    assert cache.get_stats() == {'size': 0, 'max_size': 2, 'enabled': True,
                                 'hits': 0, 'misses': 0, 'hit_rate': '0.00%'}


def test_disabled_cache_stores_nothing():
    cache = MemoCache(enabled=False)
    cache.set('a', 1)
    assert cache.get('a') is None
    assert cache.get_stats()['size'] == 0


def test_memoized_function(cache):
    calls = []

    @memoized(cache=cache)
    def square(n):
        calls.append(n)
        return n * n

    assert square(3) == 9
    assert square(3) == 9
    assert square(n=3) == 9
    assert calls == [3, 3]
    assert square.__name__ == 'square'


def test_closed_set_enumeration_uses_global_cache():
    first = enumerate_closed_sets(3)
    before = get_cache_stats()
    second = enumerate_closed_sets(3)
    assert first == second
    if before['enabled']:
        assert second is first
        assert get_cache_stats()['hits'] > before['hits']
