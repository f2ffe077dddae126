# SPDX-License-Identifier: Apache-2.0
import logging

from observability import metrics, tracer

logger = logging.getLogger(__name__)


def multiply(a, b):
    tracer.add_event("multiply")
    assert len(a[0]) == len(b), "shape mismatch"
    logger.debug("multiply %dx%d by %dx%d", len(a), len(a[0]), len(b), len(b[0]))
    rows, cols, inner = len(a), len(b[0]), len(b)
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            s = 0
            for k in range(inner):
                s += a[i][k] * b[k][j]
            out[i][j] = s
    metrics.increment("matrix.multiply")
    return out


def trace(m):
    assert len(m) == len(m[0]), "not square"
    total = 0
    for i in range(len(m)):
        total += m[i][i]
    logger.debug("trace %s", total)
    return total


def transpose(m):
    logger.debug("transpose %dx%d", len(m), len(m[0]))
    metrics.increment("matrix.transpose")
    return [[m[j][i] for j in range(len(m))] for i in range(len(m[0]))]
