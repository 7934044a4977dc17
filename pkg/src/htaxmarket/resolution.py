"""Winner determination and pool distribution for a matured frame."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

from .errors import MissingSnapshot
from .market_core import MarketParams, bin_of_rate
from .tax import pro_rata_refunds, split_fees


class InvalidReason(enum.Enum):
    NO_LOTS = "NoLots"
    NO_WINNING_LOT = "NoWinningLot"
    REPORTING_ERROR = "ReportingError"


@dataclass(frozen=True)
class Resolution:
    """Outcome of resolving one frame.

    ``share`` is the winner's fraction of the net pool. The whole net pool
    goes to the final owner of the winning lot, so it is always 1.
    """

    frame: int
    pool: int
    fee_market: int
    fee_protocol: int
    reported_rate: int | None = None
    winning_bin: int | None = None
    winner: str | None = None
    reward: int = 0
    share: int = 1
    invalid_reason: InvalidReason | None = None
    refunds: Mapping[str, int] = field(default_factory=dict)
    dust: int = 0

    @property
    def valid(self) -> bool:
        return self.invalid_reason is None

    def payouts(self) -> dict[str, int]:
        """Claimable amount per account."""
        if self.valid:
            return {self.winner: self.reward}
        return dict(self.refunds)

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "pool": self.pool,
            "fee_market": self.fee_market,
            "fee_protocol": self.fee_protocol,
            "reported_rate": self.reported_rate,
            "winning_bin": self.winning_bin,
            "winner": self.winner,
            "reward": self.reward,
            "share": self.share,
            "invalid_reason": None if self.invalid_reason is None else self.invalid_reason.value,
            "refunds": dict(sorted(self.refunds.items())),
            "dust": self.dust,
        }


@dataclass
class SettlementEntry:
    account: str
    claimable: int
    claimed: bool = False


def decide(
    frame: int,
    pool: int,
    owners: Mapping[int, str],
    taxes_paid: Mapping[str, int],
    rate: int | MissingSnapshot,
    params: MarketParams,
) -> Resolution:
    """Resolve a frame given its final owners per bin and the reported rate.

    ``rate`` is either the reported rate or the ``MissingSnapshot`` raised
    while computing it. Fees come off the pool whether or not the frame
    resolves validly; an invalid frame refunds the rest pro rata to tax paid.
    """
    fee_market, fee_protocol = split_fees(pool, params)
    net = pool - fee_market - fee_protocol
    reported = None if isinstance(rate, MissingSnapshot) else rate
    winning_bin = None if reported is None else bin_of_rate(reported, params)

    if not owners:
        reason = InvalidReason.NO_LOTS
    elif reported is None:
        reason = InvalidReason.REPORTING_ERROR
    elif winning_bin not in owners:
        reason = InvalidReason.NO_WINNING_LOT
    else:
        return Resolution(
            frame=frame, pool=pool, fee_market=fee_market, fee_protocol=fee_protocol,
            reported_rate=reported, winning_bin=winning_bin, winner=owners[winning_bin],
            reward=net,
        )

    refunds, dust = pro_rata_refunds(net, dict(taxes_paid))
    return Resolution(
        frame=frame, pool=pool, fee_market=fee_market, fee_protocol=fee_protocol,
        reported_rate=reported, winning_bin=winning_bin, invalid_reason=reason,
        refunds=refunds, dust=dust,
    )
