# SPDX-License-Identifier: Apache-2.0
import logging

from observability import metrics

logger = logging.getLogger(__name__)


class RateLimiter:
    def __init__(self, capacity, refill_per_sec):
        self.capacity = capacity
        self.refill_per_sec = refill_per_sec
        self.tokens = capacity
        self.last = None
        logger.info("rate limiter capacity=%d refill=%d", capacity, refill_per_sec)

    def try_acquire(self, now, cost=1):
        self._refill(now)
        if cost <= 0 or cost > self.capacity:
            logger.warning("rejecting cost %d", cost)
            metrics.increment("ratelimit.invalid_cost")
            return False
        if self.tokens >= cost:
            self.tokens -= cost
            logger.debug("acquired %d, left %d", cost, self.tokens)
            metrics.increment("ratelimit.acquired")
            return True
        logger.debug("rejected, tokens %d < %d", self.tokens, cost)
        metrics.increment("ratelimit.rejected")
        return False

    def _refill(self, now):
        if self.last is None:
            self.last = now
            return
        added = int((now - self.last) * self.refill_per_sec)
        logger.debug("refill added=%d", added)
        if added > 0:
            self.tokens = min(self.capacity, self.tokens + added)
            self.last = now
            metrics.set_gauge("ratelimit.tokens", self.tokens)
