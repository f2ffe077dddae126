# SPDX-License-Identifier: Apache-2.0
import logging
import time

from observability import metrics

logger = logging.getLogger(__name__)


class TtlCache:
    def __init__(self, ttl, max_items=1024):
        self.ttl = ttl
        self.max_items = max_items
        self.items = {}
        logger.info("cache ttl=%s max_items=%d", ttl, max_items)

    def get(self, key, now=None):
        now = time.time() if now is None else now
        entry = self.items.get(key)
        if entry is None:
            metrics.increment("cache.miss")
            logger.debug("miss %s", key)
            return None
        value, expires = entry
        if expires < now:
            del self.items[key]
            metrics.increment("cache.expired")
            logger.debug("expired %s", key)
            return None
        metrics.increment("cache.hit")
        return value

    def put(self, key, value, now=None):
        now = time.time() if now is None else now
        if len(self.items) >= self.max_items and key not in self.items:
            oldest = min(self.items, key=lambda k: self.items[k][1])
            logger.debug("evicting %s", oldest)
            del self.items[oldest]
            metrics.increment("cache.evictions")
        self.items[key] = (value, now + self.ttl)
        metrics.set_gauge("cache.size", len(self.items))
