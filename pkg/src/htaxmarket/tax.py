"""Harberger tax arithmetic. All division floors, so rounding never overcharges."""

from __future__ import annotations

from .errors import PurchaseAfterClose
from .market_core import BPS, MarketParams


def accrued_tax(price: int, span: int, params: MarketParams) -> int:
    """Tax owed for holding a lot priced ``price`` for ``span`` seconds.

    ``tax_bps`` is a per-period rate, pro-rated linearly over the span.
    """
    if span < 0:
        raise ValueError(f"span must be >= 0, got {span}")
    return price * params.tax_bps * span // (BPS * params.period)


def max_tax(price: int, now: int, close: int, params: MarketParams) -> int:
    """Escrow required at purchase: the tax owed if held until ``close``."""
    if now > close:
        raise PurchaseAfterClose(f"now={now} is after trading close {close}")
    return accrued_tax(price, close - now, params)


def split_fees(pool: int, params: MarketParams) -> tuple[int, int]:
    """``(market_fee, protocol_fee)`` taken from a pool at resolution."""
    return pool * params.market_fee_bps // BPS, pool * params.protocol_fee_bps // BPS


def pro_rata_refunds(net: int, paid: dict[str, int]) -> tuple[dict[str, int], int]:
    """Split ``net`` across taxpayers in proportion to what each paid.

    Returns the per-account refunds and the undistributed dust, which is
    always smaller than the number of payers.
    """
    total = sum(paid.values())
    if total == 0:
        return {}, net
    refunds = {account: net * amount // total for account, amount in paid.items() if amount > 0}
    return refunds, net - sum(refunds.values())
