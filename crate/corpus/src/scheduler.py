# SPDX-License-Identifier: Apache-2.0
import heapq
import logging

from observability import metrics

logger = logging.getLogger(__name__)


class Scheduler:
    def __init__(self, max_queue=100):
        self.max_queue = max_queue
        self.queue = []
        self.counter = 0
        self.dropped = 0
        logger.info("scheduler max_queue=%d", max_queue)

    def submit(self, name, priority, deadline=None):
        if len(self.queue) >= self.max_queue:
            logger.warning("queue full, dropping %s", name)
            metrics.increment("scheduler.dropped")
            self.dropped += 1
            return False
        self.counter += 1
        heapq.heappush(self.queue, (-priority, self.counter, name, deadline))
        metrics.set_gauge("scheduler.queued", len(self.queue))
        logger.debug("queued %s at priority %d", name, priority)
        return True

    def next(self, now):
        while self.queue:
            _, _, name, deadline = heapq.heappop(self.queue)
            if deadline is not None and deadline < now:
                logger.info("expired %s", name)
                metrics.increment("scheduler.expired")
                continue
            logger.debug("dispatching %s", name)
            metrics.increment("scheduler.dispatched")
            return name
        return None
