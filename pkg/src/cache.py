"""
In-process memoization for pure computations
Finite-field construction, closed-set enumeration and W_C sets are
rebuilt many times by the pipelines; every cached value is immutable.
"""

import logging
from collections import OrderedDict
from functools import wraps
from typing import Any, Callable, Hashable, Optional

from src.config import CACHE_CONFIG

logger = logging.getLogger(__name__)

_MISSING = object()


class MemoCache:
    """Bounded least-recently-used cache with hit/miss statistics"""

    def __init__(self, max_size: int = 256, enabled: bool = True):
        """
        Initialize cache

        Args:
            max_size (int): Maximum number of entries before eviction
            enabled (bool): When False every lookup misses and nothing is stored
        """
        self.entries = OrderedDict()
        self.max_size = max_size
        self.enabled = enabled
        self.hits = 0
        self.misses = 0
        logger.debug(f"Cache initialized with max_size={max_size}, enabled={enabled}")

    def get(self, key: Hashable, default: Any = None) -> Any:
        """
        Get value from cache

        Args:
            key (Hashable): Cache key
            default (Any): Returned on a miss

        Returns:
            Any: Cached value or default
        """
        if self.enabled and key in self.entries:
            self.entries.move_to_end(key)
            self.hits += 1
            return self.entries[key]

        self.misses += 1
        return default

    def set(self, key: Hashable, value: Any) -> None:
        """
        Store a value, evicting the least recently used entry when full

        Args:
            key (Hashable): Cache key
            value (Any): Value to cache
        """
        if not self.enabled:
            return
        if key not in self.entries and len(self.entries) >= self.max_size:
            oldest_key, _ = self.entries.popitem(last=False)
            logger.debug(f"Cache full, evicted key: {oldest_key!r}")
        self.entries[key] = value
        self.entries.move_to_end(key)

    def delete(self, key: Hashable) -> None:
        self.entries.pop(key, None)

    def clear(self) -> None:
        """Clear all cache entries and reset statistics"""
        self.entries.clear()
        self.hits = 0
        self.misses = 0
        logger.info("Cache cleared")

    def get_stats(self) -> dict:
        """
        Get cache statistics

        Returns:
            dict: Cache statistics
        """
        total_requests = self.hits + self.misses
        hit_rate = (self.hits / total_requests * 100) if total_requests > 0 else 0

        return {
            'size': len(self.entries),
            'max_size': self.max_size,
            'enabled': self.enabled,
            'hits': self.hits,
            'misses': self.misses,
            'hit_rate': f"{hit_rate:.2f}%"
        }


# Global cache instance
_cache = MemoCache(max_size=CACHE_CONFIG['max_size'], enabled=CACHE_CONFIG['enabled'])


def memoized(func: Optional[Callable] = None, *, cache: Optional[MemoCache] = None):
    """
    Decorator caching the results of a pure function with hashable arguments

    Example:
        @memoized
        def enumerate_closed_sets(d):
            ...
    """
    def decorator(inner: Callable) -> Callable:
        @wraps(inner)
        def wrapper(*args, **kwargs):
            store = cache or _cache
            key = (inner.__module__, inner.__qualname__, args, tuple(sorted(kwargs.items())))
            value = store.get(key, _MISSING)
            if value is not _MISSING:
                return value

            value = inner(*args, **kwargs)
            store.set(key, value)
            return value

        return wrapper

    if func is not None:
        return decorator(func)
    return decorator


def get_cache() -> MemoCache:
    """Get the global cache instance"""
    return _cache


def clear_cache() -> None:
    """Clear the global cache"""
    _cache.clear()


def get_cache_stats() -> dict:
    """Get global cache statistics"""
    return _cache.get_stats()
