# SPDX-License-Identifier: Apache-2.0
import logging

from absl import flags

from observability import metrics

flags.DEFINE_boolean("config_strict", False, "Fail on malformed lines.")
logger = logging.getLogger(__name__)


def parse_config(text, strict=False):
    logger.info("parsing %d bytes of config", len(text))
    values = {}
    errors = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            logger.error("line %d: missing '='", lineno)
            metrics.increment("config.parse_errors")
            errors += 1
            if strict:
                raise ValueError("line %d: missing '='" % lineno)
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    logger.debug("parsed %d keys with %d errors", len(values), errors)
    metrics.set_gauge("config.keys", len(values))
    return values


def get_int(values, key, default=0):
    if key not in values:
        logger.debug("missing %s, using %d", key, default)
        return default
    return int(values[key])
