"""The stateful HTAX market: lot trading, tax collection, reporting and payout.

A :class:`Market` is a single-writer state machine. Callers pass the current
time into every mutating method and must serialize calls themselves. Each
method validates fully before it mutates, so a raised ``MarketError``
leaves the market exactly as it was.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    AlreadyFinalized,
    AlreadyResolved,
    FrameStillOpen,
    InsufficientBalance,
    InvalidFrame,
    MissingSnapshot,
    NotMatured,
    NotResolved,
    NothingToClaim,
    TimeBeforeMarketDebut,
)
from .ledger import CUSTODY, FEE_MARKET, FEE_PROTOCOL, Ledger, account_bucket, check_money, pool_bucket
from .market_core import (
    ContractState,
    LotId,
    MarketParams,
    contract_state,
    frame_of_time,
    is_valid_purchase_frame,
    maturity,
    trading_close,
)
from .oracle import AmmPair, ReportingState, rate_from_snapshots, take_snapshot
from .resolution import Resolution, SettlementEntry, decide
from .tax import accrued_tax, max_tax


@dataclass(frozen=True)
class Ownership:
    owner: str
    price: int
    acquired_at: int
    escrowed_max_tax: int


@dataclass
class FrameRecord:
    """Per-frame contract: who owns which bin, the pool, reporting and payout."""

    frame: int
    ownerships: dict[int, Ownership] = field(default_factory=dict)
    pool: int = 0
    taxes_paid: dict[str, int] = field(default_factory=dict)
    taxes_finalized: bool = False
    reporting: ReportingState = field(default_factory=ReportingState)
    resolution: Resolution | None = None
    settlements: dict[str, SettlementEntry] = field(default_factory=dict)

    def fully_settled(self) -> bool:
        if self.resolution is None or not self.resolution.valid:
            return False
        return all(e.claimed or e.claimable == 0 for e in self.settlements.values())

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "pool": self.pool,
            "taxes_finalized": self.taxes_finalized,
            "taxes_paid": dict(sorted(self.taxes_paid.items())),
            "ownerships": {
                str(m): {
                    "owner": o.owner,
                    "price": o.price,
                    "acquired_at": o.acquired_at,
                    "escrowed_max_tax": o.escrowed_max_tax,
                }
                for m, o in sorted(self.ownerships.items())
            },
            "snapshots": self.reporting.to_dict(),
            "resolution": None if self.resolution is None else self.resolution.to_dict(),
            "settlements": {
                a: {"claimable": e.claimable, "claimed": e.claimed}
                for a, e in sorted(self.settlements.items())
            },
        }


@dataclass(frozen=True)
class PurchaseReceipt:
    lot: LotId
    buyer: str
    new_price: int
    cost: int
    escrow: int
    acquisition_paid: int
    previous_owner: str | None = None
    tax_charged: int = 0
    escrow_refund: int = 0


class Market:
    def __init__(self, params: MarketParams, pair: AmmPair | None = None, ledger: Ledger | None = None):
        self.params = params
        self.pair = pair if pair is not None else AmmPair()
        self.ledger = ledger if ledger is not None else Ledger()
        self.frames: dict[int, FrameRecord] = {}

    @property
    def events(self) -> list[dict]:
        return self.ledger.events

    def _record(self, n: int, now: int) -> FrameRecord:
        record = self.frames.get(n)
        if record is None:
            record = self.frames[n] = FrameRecord(n)
            self.ledger.log("contract_created", now, frame=n)
        return record

    def state(self, n: int, now: int) -> ContractState:
        record = self.frames.get(n) or FrameRecord(n)
        return contract_state(record, now, self.params)

    # funds

    def deposit(self, account: str, amount: int, now: int) -> None:
        self.ledger.deposit(account, amount, now)

    def withdraw_seller_proceeds(self, account: str, now: int) -> int:
        """Withdraw an account's whole free balance out of the market.

        Resale proceeds and escrow refunds are credited to the free balance
        when a lot is bought away, so this is how a seller collects them.
        """
        amount = self.ledger.free_balance(account)
        if amount == 0:
            raise NothingToClaim(f"{account} has no free balance")
        self.ledger.withdraw(account, amount, now)
        return amount

    # trading

    def buy_lot(self, lot: LotId, buyer: str, new_price: int, now: int) -> PurchaseReceipt:
        params = self.params
        check_money(new_price, "new_price")
        if not is_valid_purchase_frame(lot.frame, now, params):
            raise InvalidFrame(f"frame {lot.frame} has started trading close at t={now}")
        close = trading_close(lot.frame, params)
        escrow = max_tax(new_price, now, close, params)
        record = self.frames.get(lot.frame)
        prev = record.ownerships.get(lot.bin) if record is not None else None
        acquisition = prev.price if prev is not None else 0
        cost = escrow + acquisition
        have = self.ledger.free_balance(buyer)
        if have < cost:
            raise InsufficientBalance(f"{buyer} holds {have}, purchase costs {cost}")

        # validated; mutate from here on
        record = self._record(lot.frame, now)
        n = lot.frame
        self.ledger.transfer(
            "purchase", account_bucket(buyer), CUSTODY, cost, now,
            account=buyer, frame=n, bin=lot.bin, price=new_price, escrow=escrow,
            acquisition=acquisition, previous_owner=prev.owner if prev else None,
        )
        charged = refund = 0
        if prev is not None:
            charged = accrued_tax(prev.price, now - prev.acquired_at, params)
            refund = prev.escrowed_max_tax - charged
            self._charge_tax(record, prev.owner, charged, now, lot.bin)
            self.ledger.transfer("refund", CUSTODY, account_bucket(prev.owner), refund, now,
                                 account=prev.owner, frame=n, bin=lot.bin)
            self.ledger.transfer("proceeds", CUSTODY, account_bucket(prev.owner), acquisition, now,
                                 account=prev.owner, frame=n, bin=lot.bin)
        record.ownerships[lot.bin] = Ownership(buyer, new_price, now, escrow)
        self.trigger_reporting(now)
        return PurchaseReceipt(
            lot=lot, buyer=buyer, new_price=new_price, cost=cost, escrow=escrow,
            acquisition_paid=acquisition, previous_owner=prev.owner if prev else None,
            tax_charged=charged, escrow_refund=refund,
        )

    def _charge_tax(self, record: FrameRecord, owner: str, amount: int, now: int, m: int) -> None:
        self.ledger.transfer("tax_charge", CUSTODY, pool_bucket(record.frame), amount, now,
                             account=owner, frame=record.frame, bin=m)
        record.pool += amount
        record.taxes_paid[owner] = record.taxes_paid.get(owner, 0) + amount

    def finalize_frame_taxes(self, n: int, now: int) -> int:
        """Charge every remaining owner of frame ``n`` their full escrow.

        Returns the amount moved into the pool.
        """
        close = trading_close(n, self.params)
        if now < close:
            raise FrameStillOpen(f"frame {n} trades until t={close}")
        record = self.frames.get(n)
        if record is not None and record.taxes_finalized:
            raise AlreadyFinalized(f"frame {n} taxes already finalized")
        record = self._record(n, now)
        moved = 0
        for m, own in sorted(record.ownerships.items()):
            # held to close, so the escrow is exactly the tax owed
            assert own.escrowed_max_tax == accrued_tax(own.price, close - own.acquired_at, self.params)
            self._charge_tax(record, own.owner, own.escrowed_max_tax, now, m)
            moved += own.escrowed_max_tax
            record.ownerships[m] = Ownership(own.owner, own.price, own.acquired_at, 0)
        record.taxes_finalized = True
        self.ledger.log("finalized", now, frame=n, amount=moved)
        return moved

    def pool_balance(self, n: int) -> int:
        record = self.frames.get(n)
        return record.pool if record is not None else 0

    # reporting

    def report_snapshot(self, n: int, now: int) -> str | None:
        """Try to snapshot the cumulative rate for frame ``n``.

        Returns the window written, or ``None`` when ``now`` is outside both
        windows or the frame has never been traded.
        """
        record = self.frames.get(n)
        if record is None or record.resolution is not None:
            return None
        which = take_snapshot(record.reporting, self.pair, n, now, self.params)
        if which is not None:
            snap = getattr(record.reporting, which)
            self.ledger.log("snapshot", now, frame=n, window=which, cumulative=snap.cumulative)
        return which

    def trigger_reporting(self, now: int) -> list[tuple[int, str]]:
        """Snapshot for every frame whose interval contains ``now``.

        Frames are closed intervals here, so at a frame boundary both the
        ending frame (second window) and the starting one are attempted.
        """
        try:
            current = frame_of_time(now, self.params)
        except TimeBeforeMarketDebut:
            return []
        candidates = [current]
        if current > 0 and maturity(current - 1, self.params) == now:
            candidates.insert(0, current - 1)
        written = []
        for n in candidates:
            which = self.report_snapshot(n, now)
            if which is not None:
                written.append((n, which))
        return written

    def reported_rate(self, n: int, now: int | None = None) -> int:
        if now is not None and now < maturity(n, self.params):
            raise NotMatured(f"frame {n} matures at t={maturity(n, self.params)}")
        record = self.frames.get(n) or FrameRecord(n)
        return rate_from_snapshots(record.reporting)

    # resolution and settlement

    def resolve(self, n: int, now: int) -> Resolution:
        params = self.params
        if now < maturity(n, params):
            raise NotMatured(f"frame {n} matures at t={maturity(n, params)}")
        existing = self.frames.get(n)
        if existing is not None and existing.resolution is not None:
            raise AlreadyResolved(f"frame {n} already resolved")
        record = self._record(n, now)
        if not record.taxes_finalized:
            self.finalize_frame_taxes(n, now)
        try:
            rate: int | MissingSnapshot = rate_from_snapshots(record.reporting)
        except MissingSnapshot as exc:
            rate = exc
        owners = {m: o.owner for m, o in record.ownerships.items()}
        res = decide(n, record.pool, owners, record.taxes_paid, rate, params)

        pool = pool_bucket(n)
        self.ledger.transfer("fee", pool, FEE_MARKET, res.fee_market, now, frame=n,
                             recipient=params.market_fee_recipient)
        self.ledger.transfer("fee", pool, FEE_PROTOCOL, res.fee_protocol, now, frame=n,
                             recipient=params.protocol_fee_recipient)
        if res.dust:
            self.ledger.transfer("fee", pool, FEE_PROTOCOL, res.dust, now, frame=n,
                                 recipient=params.protocol_fee_recipient, dust=True)
        record.resolution = res
        record.settlements = {a: SettlementEntry(a, amt) for a, amt in res.payouts().items()}
        self.ledger.log("resolution", now, **res.to_dict())
        return res

    def settle(self, n: int, account: str, now: int) -> int:
        record = self.frames.get(n)
        if record is None or record.resolution is None:
            raise NotResolved(f"frame {n} is not resolved")
        entry = record.settlements.get(account)
        if entry is None or entry.claimed or entry.claimable == 0:
            raise NothingToClaim(f"{account} has nothing to claim in frame {n}")
        amount = entry.claimable
        self.ledger.transfer("settlement", pool_bucket(n), account_bucket(account), amount, now,
                             account=account, frame=n)
        entry.claimed = True
        return amount
