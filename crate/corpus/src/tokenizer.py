# SPDX-License-Identifier: Apache-2.0
import logging

from observability import metrics, tracer

logger = logging.getLogger(__name__)

OPERATORS = "+-*/"


def tokenize(source):
    tracer.add_event("tokenize")
    logger.debug("tokenizing %d chars", len(source))
    tokens = []
    i = 0
    while i < len(source):
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            start = i
            while i < len(source) and source[i].isdigit():
                i += 1
            tokens.append(("num", source[start:i]))
            continue
        if c in OPERATORS or c in "()":
            tokens.append(("op", c))
            i += 1
            continue
        logger.error("unexpected character %r at %d", c, i)
        metrics.increment("tokenizer.errors")
        raise ValueError("unexpected character %r" % c)
    metrics.observe("tokenizer.tokens", len(tokens))
    return tokens


def precedence(op):
    if op in "*/":
        return 2
    if op in "+-":
        return 1
    logger.debug("no precedence for %s", op)
    return 0
