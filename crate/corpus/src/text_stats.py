# SPDX-License-Identifier: Apache-2.0
import logging
import re

from observability import metrics

logger = logging.getLogger(__name__)
WORD = re.compile(r"[A-Za-z']+")


def word_counts(text, min_length=1):
    logger.debug("counting words in %d chars", len(text))
    counts = {}
    for word in WORD.findall(text.lower()):
        if len(word) < min_length:
            continue
        counts[word] = counts.get(word, 0) + 1
    metrics.observe("text.distinct_words", len(counts))
    return counts


def top_words(counts, n):
    logger.debug("top %d of %d words", n, len(counts))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:n]


def average_sentence_length(text):
    sentences = [s for s in re.split(r"[.!?]+", text) if s.strip()]
    if not sentences:
        logger.warning("no sentences found")
        metrics.increment("text.empty_input")
        return 0.0
    words = sum(len(WORD.findall(s)) for s in sentences)
    logger.debug("%d words in %d sentences", words, len(sentences))
    metrics.increment("text.sentences")
    return words / len(sentences)
