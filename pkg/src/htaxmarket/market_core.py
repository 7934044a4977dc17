"""Market configuration, the frame/bin grid and contract-state classification.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

from .errors import InvalidParams, NegativeRate, TimeBeforeMarketDebut

if TYPE_CHECKING:
    from .market import FrameRecord

BPS = 10_000


@dataclass(frozen=True)
class MarketParams:
    """Static configuration of one HTAX market.

    Times are integer seconds, rates are integers already multiplied by
    ``rate_scale`` and money is integer minor units of the accounting token.
    ``tax_bps`` is charged per full ``period`` of ownership.
    """

    initial_timestamp: int
    period: int
    granularity: int
    tax_bps: int
    market_fee_bps: int
    protocol_fee_bps: int
    reporting_interval: int
    rate_scale: int = 1
    accounting_decimals: int = 0
    market_fee_recipient: str = "market"
    protocol_fee_recipient: str = "protocol"

    def __post_init__(self) -> None:
        for name in (
            "initial_timestamp", "period", "granularity", "tax_bps", "market_fee_bps",
            "protocol_fee_bps", "reporting_interval", "rate_scale", "accounting_decimals",
        ):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvalidParams(f"{name} must be an integer, got {value!r}")
        if self.period <= 0:
            raise InvalidParams("period must be > 0")
        if self.granularity <= 0:
            raise InvalidParams("granularity must be > 0")
        if not 0 < self.reporting_interval < self.period:
            raise InvalidParams("reporting_interval must satisfy 0 < reporting_interval < period")
        if not 0 <= self.tax_bps <= BPS:
            raise InvalidParams("tax_bps must be within [0, 10000]")
        if self.market_fee_bps < 0 or self.protocol_fee_bps < 0:
            raise InvalidParams("market_fee_bps and protocol_fee_bps must be >= 0")
        if self.market_fee_bps + self.protocol_fee_bps > BPS:
            raise InvalidParams("market_fee_bps + protocol_fee_bps must be <= 10000")
        if self.initial_timestamp < 0:
            raise InvalidParams("initial_timestamp must be >= 0")
        if self.accounting_decimals < 0:
            raise InvalidParams("accounting_decimals must be >= 0")
        scale = self.rate_scale
        if scale < 1 or 10 ** (len(str(scale)) - 1) != scale:
            raise InvalidParams("rate_scale must be a power of ten")

    def to_dict(self) -> dict:
        return asdict(self)


class ContractState(enum.Enum):
    CREATED = "Created"
    OPENED = "Opened"
    CLOSED = "Closed"
    MATURED = "Matured"
    REPORTED = "Reported"
    RESOLVED = "Resolved"
    SETTLED = "Settled"
    INVALID = "Invalid"

    @property
    def rank(self) -> int:
        """Position along the forward chain; Invalid shares the Resolved rank."""
        return _RANK[self]


_RANK = {
    ContractState.CREATED: 0,
    ContractState.OPENED: 1,
    ContractState.CLOSED: 2,
    ContractState.MATURED: 3,
    ContractState.REPORTED: 4,
    ContractState.RESOLVED: 5,
    ContractState.SETTLED: 6,
    ContractState.INVALID: 5,
}


def is_legal_transition(before: ContractState, after: ContractState) -> bool:
    """True when ``after`` is reachable from ``before`` moving forward only.

    Skipping intermediate states is allowed since time-derived states are
    only ever sampled. Invalid is terminal and only entered before Resolved.
    """
    if before is after:
        return True
    if before is ContractState.INVALID:
        return False
    if after is ContractState.INVALID:
        return before.rank < ContractState.RESOLVED.rank
    return after.rank > before.rank


@dataclass(frozen=True, order=True)
class LotId:
    frame: int
    bin: int

    def __post_init__(self) -> None:
        if self.frame < 0 or self.bin < 0:
            raise InvalidParams(f"lot indices must be non-negative, got ({self.frame}, {self.bin})")


def frame_of_time(t: int, params: MarketParams) -> int:
    if t < params.initial_timestamp:
        raise TimeBeforeMarketDebut(f"t={t} precedes market debut {params.initial_timestamp}")
    return (t - params.initial_timestamp) // params.period


def frame_bounds(n: int, params: MarketParams) -> tuple[int, int]:
    start = params.initial_timestamp + n * params.period
    return start, start + params.period


def trading_close(n: int, params: MarketParams) -> int:
    """Last instant at which ownership of a lot in frame ``n`` can change."""
    return frame_bounds(n, params)[0]


def maturity(n: int, params: MarketParams) -> int:
    return frame_bounds(n, params)[1]


def bin_of_rate(rate: int, params: MarketParams) -> int:
    # lower bound inclusive, upper exclusive: a rate on a boundary lands in the upper bin
    if rate < 0:
        raise NegativeRate(f"rate must be >= 0, got {rate}")
    return rate // params.granularity


def bin_bounds(m: int, params: MarketParams) -> tuple[int, int]:
    lo = m * params.granularity
    return lo, lo + params.granularity


def is_valid_purchase_frame(n: int, now: int, params: MarketParams) -> bool:
    return frame_bounds(n, params)[0] > now


def reporting_windows(n: int, params: MarketParams) -> tuple[tuple[int, int], tuple[int, int]]:
    """``((w1_lo, w1_hi), (w2_lo, w2_hi))``.

    The first window is closed at both ends, the second excludes its left
    end, so the shared boundary belongs to the first window only.
    """
    start, end = frame_bounds(n, params)
    split = end - params.reporting_interval
    return (start, split), (split, end)


def contract_state(frame: FrameRecord, now: int, params: MarketParams) -> ContractState:
    resolution = frame.resolution
    if resolution is not None:
        if resolution.invalid_reason is not None:
            return ContractState.INVALID
        if frame.fully_settled():
            return ContractState.SETTLED
        return ContractState.RESOLVED
    start, end = frame_bounds(frame.frame, params)
    if now < start:
        return ContractState.OPENED
    if now < end:
        return ContractState.CLOSED
    if frame.reporting.complete():
        return ContractState.REPORTED
    return ContractState.MATURED
