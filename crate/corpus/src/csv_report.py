# SPDX-License-Identifier: Apache-2.0
import logging

from observability import metrics, tracer

logger = logging.getLogger(__name__)


def summarize(rows, column):
    tracer.add_event("summarize")
    logger.debug("summarizing %d rows on %s", len(rows), column)
    total = 0
    count = 0
    for row in rows:
        value = row.get(column)
        if value is None or value == "":
            metrics.increment("report.missing_values")
            continue
        total += float(value)
        count += 1
    if count == 0:
        logger.warning("no values in column %s", column)
        return {"count": 0, "mean": 0.0}
    metrics.observe("report.rows", count)
    return {"count": count, "mean": total / count}


def render(summary, out):
    out.write("count,mean\n")
    out.write("%d,%.3f\n" % (summary["count"], summary["mean"]))
    out.flush()
    logger.info("wrote summary with %d rows", summary["count"])
    metrics.increment("report.rendered")
