"""Double-entry fund accounting with an append-only event log.

Every balance lives in a named bucket. Money moves between buckets only via
:meth:`Ledger.transfer`, which records one posting per move. ``external`` is
the world outside the market: deposits come from it, withdrawals go to it.
"""

from __future__ import annotations

from typing import Any

from .errors import InsufficientBalance, MoneyOverflow

MAX_MONEY = 2**128 - 1

EXTERNAL = "external"
CUSTODY = "custody"
FEE_MARKET = "fee:market"
FEE_PROTOCOL = "fee:protocol"

POSTING_KINDS = frozenset(
    {"deposit", "withdrawal", "purchase", "tax_charge", "refund", "proceeds", "fee", "settlement"}
)


def account_bucket(account: str) -> str:
    return f"account:{account}"


def pool_bucket(frame: int) -> str:
    return f"pool:{frame}"


def check_money(amount: int, what: str = "amount") -> int:
    if not isinstance(amount, int) or isinstance(amount, bool):
        raise TypeError(f"{what} must be an integer, got {amount!r}")
    if amount < 0:
        raise ValueError(f"{what} must be >= 0, got {amount}")
    if amount > MAX_MONEY:
        raise MoneyOverflow(f"{what} exceeds 128-bit range")
    return amount


class Ledger:
    def __init__(self) -> None:
        self.accounts: dict[str, int] = {}
        self.custody = 0
        self.pools: dict[int, int] = {}
        self.fee_market = 0
        self.fee_protocol = 0
        self.total_deposited = 0
        self.total_withdrawn = 0
        self.events: list[dict[str, Any]] = []

    def balance(self, bucket: str) -> int:
        if bucket == CUSTODY:
            return self.custody
        if bucket == FEE_MARKET:
            return self.fee_market
        if bucket == FEE_PROTOCOL:
            return self.fee_protocol
        prefix, _, key = bucket.partition(":")
        if prefix == "account":
            return self.accounts.get(key, 0)
        if prefix == "pool":
            return self.pools.get(int(key), 0)
        raise KeyError(bucket)

    def _set(self, bucket: str, value: int) -> None:
        if bucket == CUSTODY:
            self.custody = value
        elif bucket == FEE_MARKET:
            self.fee_market = value
        elif bucket == FEE_PROTOCOL:
            self.fee_protocol = value
        else:
            prefix, _, key = bucket.partition(":")
            if prefix == "account":
                self.accounts[key] = value
            elif prefix == "pool":
                self.pools[int(key)] = value
            else:
                raise KeyError(bucket)

    def free_balance(self, account: str) -> int:
        return self.accounts.get(account, 0)

    def ensure_funds(self, bucket: str, amount: int) -> None:
        have = self.balance(bucket)
        if have < amount:
            raise InsufficientBalance(f"{bucket} holds {have}, needs {amount}")

    def ensure_room(self, bucket: str, amount: int) -> None:
        current = self.total_deposited if bucket == EXTERNAL else self.balance(bucket)
        if current + amount > MAX_MONEY:
            raise MoneyOverflow(f"crediting {amount} to {bucket} overflows")

    def transfer(self, kind: str, src: str, dst: str, amount: int, time: int, **meta: Any) -> dict:
        """Move ``amount`` from ``src`` to ``dst`` and append the posting."""
        assert kind in POSTING_KINDS, kind
        check_money(amount)
        if src == EXTERNAL:
            self.ensure_room(EXTERNAL, amount)
        else:
            self.ensure_funds(src, amount)
        if dst != EXTERNAL:
            self.ensure_room(dst, amount)
        if src == EXTERNAL:
            self.total_deposited += amount
        else:
            self._set(src, self.balance(src) - amount)
        if dst == EXTERNAL:
            self.total_withdrawn += amount
        else:
            self._set(dst, self.balance(dst) + amount)
        return self.log(kind, time, src=src, dst=dst, amount=amount, **meta)

    def log(self, kind: str, time: int, **fields: Any) -> dict:
        event = {"seq": len(self.events), "time": time, "kind": kind, **fields}
        self.events.append(event)
        return event

    def deposit(self, account: str, amount: int, time: int) -> dict:
        return self.transfer("deposit", EXTERNAL, account_bucket(account), amount, time, account=account)

    def withdraw(self, account: str, amount: int, time: int) -> dict:
        return self.transfer("withdrawal", account_bucket(account), EXTERNAL, amount, time, account=account)

    def held(self) -> int:
        """Sum of every internal bucket."""
        return (
            sum(self.accounts.values()) + self.custody + sum(self.pools.values())
            + self.fee_market + self.fee_protocol
        )

    def conservation_gap(self) -> int:
        """Zero whenever the books balance."""
        return self.total_deposited - self.total_withdrawn - self.held()

    def balances(self) -> dict[str, Any]:
        return {
            "accounts": dict(sorted(self.accounts.items())),
            "custody": self.custody,
            "pools": {str(n): v for n, v in sorted(self.pools.items())},
            "fee_market": self.fee_market,
            "fee_protocol": self.fee_protocol,
            "total_deposited": self.total_deposited,
            "total_withdrawn": self.total_withdrawn,
        }
