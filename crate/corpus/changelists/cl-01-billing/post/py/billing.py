# SPDX-License-Identifier: Apache-2.0
import logging

from observability import metrics, tracer

logger = logging.getLogger(__name__)


def invoice_total(lines, tax_rate, discount=0):
    tracer.add_event("invoice_total")
    logger.debug("computing invoice over %d lines", len(lines))
    subtotal = 0
    for qty, price in lines:
        if qty <= 0:
            logger.warning("skipping line with qty %d", qty)
            metrics.increment("billing.skipped_lines")
            continue
        subtotal += qty * price
    if discount > 0 and subtotal > discount:
        subtotal = subtotal - discount
        metrics.increment("billing.discounts")
    tax = subtotal * tax_rate
    logger.debug("subtotal=%s tax=%s", subtotal, tax)
    metrics.observe("billing.invoice_total", subtotal + tax)
    return subtotal + tax


def late_fee(days_late, balance):
    if days_late <= 0:
        return 0
    fee = balance * 0.01 * days_late
    logger.debug("raw late fee %s for %d days", fee, days_late)
    if fee > 50:
        fee = 50
        metrics.increment("billing.fee_capped")
    return fee


def apply_payment(account, amount):
    tracer.add_event("apply_payment")
    if amount <= 0:
        logger.error("rejected payment of %s", amount)
        raise ValueError("payment must be positive")
    account.balance -= amount
    account.payments += 1
    logger.info("applied payment of %s", amount)
    metrics.increment("billing.payments")
    metrics.observe("billing.payment_amount", amount)
    return account.balance
