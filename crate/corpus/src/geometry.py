# SPDX-License-Identifier: Apache-2.0
import logging
import math

from observability import metrics

logger = logging.getLogger(__name__)


def distance(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


def polygon_area(points):
    if len(points) < 3:
        logger.warning("degenerate polygon with %d points", len(points))
        metrics.increment("geometry.degenerate")
        return 0.0
    area = 0.0
    for i in range(len(points)):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % len(points)]
        area += x1 * y2 - x2 * y1
    logger.debug("signed area %s", area)
    metrics.increment("geometry.polygons")
    return abs(area) / 2


def bounding_box(points):
    assert points, "need at least one point"
    logger.debug("bounding %d points", len(points))
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    box = (min(xs), min(ys), max(xs), max(ys))
    metrics.observe("geometry.box_width", box[2] - box[0])
    return box
