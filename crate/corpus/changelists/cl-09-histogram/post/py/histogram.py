# SPDX-License-Identifier: Apache-2.0
import logging

from observability import metrics

logger = logging.getLogger(__name__)


class Histogram:
    def __init__(self, lo, hi, buckets):
        assert hi > lo, "empty range"
        self.lo = lo
        self.width = (hi - lo) / buckets
        self.counts = [0] * buckets
        self.total = 0
        logger.debug("histogram [%s, %s) with %d buckets", lo, hi, buckets)

    def add(self, value):
        index = int((value - self.lo) / self.width)
        if index < 0:
            index = 0
            metrics.increment("histogram.underflow")
        if index >= len(self.counts):
            index = len(self.counts) - 1
            metrics.increment("histogram.overflow")
        self.counts[index] += 1
        self.total += 1

    def percentile(self, p):
        logger.debug("percentile %s over %d values", p, self.total)
        target = p / 100.0 * self.total
        seen = 0
        for i, c in enumerate(self.counts):
            seen += c
            if seen >= target:
                return self.lo + (i + 0.5) * self.width
        logger.warning("percentile %s fell through", p)
        metrics.increment("histogram.fallthrough")
        return self.lo + len(self.counts) * self.width
