# cache.py
import hashlib
import json
import logging

from django.core.cache import cache

logger = logging.getLogger('core')


# ──────────────
# Helper functions
# ──────────────

def cache_set(key: str, value, timeout: int = 300):
    """
    Set a value in the cache under `key` for `timeout` seconds.
    """
    cache.set(key, value, timeout)


def cache_get(key: str):
    """
    Retrieve a value from the cache. Returns None if not found.
    """
    return cache.get(key)


def cache_delete(key: str):
    """
    Delete a value from the cache.
    """
    cache.delete(key)


# ──────────────
# Cache-key builders
# ──────────────

def fit_cache_key(dataset_hash, method, config) -> str:
    # keyed on the estimator config as well as the data
    payload = json.dumps(config.as_dict(), sort_keys=True)
    config_hash = hashlib.sha256(payload.encode('utf-8')).hexdigest()[:16]
    return f"fit:{method}:{dataset_hash}:{config_hash}"


# ──────────────
# Memoized reports
# ──────────────

def cached_report(key, build, timeout=300, use_cache=True):
    """
    Return the cached value under `key`, building and storing it on a miss.
    With use_cache=False the value is rebuilt and any stale entry is invalidated.
    """
    if not use_cache:
        cache_delete(key)
        return build()
    data = cache_get(key)
    if data is not None:
        logger.debug(f'cache hit {key}')
        return data
    data = build()
    cache_set(key, data, timeout)
    return data
