# SPDX-License-Identifier: Apache-2.0
import logging
import time

from observability import metrics

logger = logging.getLogger(__name__)


def backoff(attempt, initial=0.1, multiplier=2.0, cap=5.0):
    delay = initial * multiplier ** max(attempt - 1, 0)
    if delay > cap:
        delay = cap
    logger.debug("attempt %d backoff %.2f", attempt, delay)
    return delay


def call_with_retry(fn, attempts=3, retry_on=(IOError,)):
    last_error = None
    for attempt in range(1, attempts + 1):
        try:
            result = fn()
            metrics.increment("retry.success")
            logger.debug("succeeded on attempt %d", attempt)
            return result
        except retry_on as e:
            last_error = e
            logger.warning("attempt %d failed: %s", attempt, e)
            metrics.increment("retry.failure")
            if attempt < attempts:
                time.sleep(backoff(attempt))
    logger.error("giving up after %d attempts", attempts)
    metrics.increment("retry.exhausted")
    raise last_error
