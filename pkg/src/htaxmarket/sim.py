"""Deterministic scenario execution and report verification."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import MarketError
from .ledger import EXTERNAL, POSTING_KINDS
from .market import Market
from .market_core import BPS, LotId, MarketParams, trading_close
from .scenario import Action, Scenario

Observer = Callable[[Market, int, Action, bool], None]


@dataclass
class SimReport:
    params: dict[str, Any]
    final_time: int | None
    balances: dict[str, Any]
    frames: dict[str, Any]
    actions: list[dict[str, Any]]
    events: list[dict[str, Any]]
    checksum: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": self.params,
            "final_time": self.final_time,
            "balances": self.balances,
            "frames": self.frames,
            "actions": self.actions,
            "events": self.events,
            "checksum": self.checksum,
        }

    def to_json(self) -> str:
        return dumps_report(self.to_dict())

    @property
    def rejected(self) -> list[dict[str, Any]]:
        return [a for a in self.actions if a["status"] == "rejected"]


def dumps_report(report: dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _apply(market: Market, action: Action) -> Any:
    t = action.time
    kind = action.type
    if kind == "deposit":
        market.deposit(action.actor, action.amount, t)
        return None
    if kind == "buy":
        receipt = market.buy_lot(LotId(action.frame, action.bin), action.actor, action.price, t)
        return {"cost": receipt.cost, "escrow": receipt.escrow, "acquisition_paid": receipt.acquisition_paid}
    if kind == "report":
        if action.frame is None:
            return [[n, w] for n, w in market.trigger_reporting(t)]
        return market.report_snapshot(action.frame, t)
    if kind == "resolve":
        return market.resolve(action.frame, t).to_dict()
    if kind == "settle":
        return market.settle(action.frame, action.actor, t)
    if kind == "withdraw":
        return market.withdraw_seller_proceeds(action.actor, t)
    raise AssertionError(kind)


def run(scenario: Scenario, observer: Observer | None = None) -> SimReport:
    """Replay a scenario against a fresh market.

    Price-path points are applied before any action at the same timestamp.
    A rejected action is recorded in the report and the run continues.
    ``observer`` is called after every action with ``(market, index, action, ok)``.
    """
    market = Market(scenario.market_params)
    path = list(scenario.price_path)
    next_point = 0
    outcomes = []

    def advance(until: int | None) -> None:
        nonlocal next_point
        while next_point < len(path) and (until is None or path[next_point][0] <= until):
            t, rate = path[next_point]
            market.pair.set_spot_rate(t, rate)
            next_point += 1

    for i, action in enumerate(scenario.actions):
        advance(action.time)
        entry: dict[str, Any] = {"index": i, **action.to_dict()}
        try:
            result = _apply(market, action)
        except MarketError as exc:
            entry.update(status="rejected", error=type(exc).__name__, message=str(exc))
            market.ledger.log("rejected", action.time, index=i, action=action.type,
                              error=type(exc).__name__)
            ok = False
        else:
            entry.update(status="ok", result=result)
            ok = True
        outcomes.append(entry)
        if observer is not None:
            observer(market, i, action, ok)
    advance(None)

    times = [a.time for a in scenario.actions] + [t for t, _ in path]
    final_time = max(times) if times else None
    return build_report(market, final_time, outcomes)


def build_report(market: Market, final_time: int | None, outcomes: list[dict[str, Any]]) -> SimReport:
    frames = {}
    for n, record in sorted(market.frames.items()):
        summary = record.to_dict()
        if final_time is not None:
            summary["state"] = market.state(n, final_time).value
        frames[str(n)] = summary
    ledger = market.ledger
    net = ledger.total_deposited - ledger.total_withdrawn
    return SimReport(
        params=market.params.to_dict(),
        final_time=final_time,
        balances=ledger.balances(),
        frames=frames,
        actions=outcomes,
        events=[dict(e) for e in ledger.events],
        checksum={"net_deposits": net, "held": ledger.held(), "balanced": net == ledger.held()},
    )


@dataclass
class CheckSummary:
    violations: dict[str, list[str]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    @property
    def failed(self) -> list[str]:
        return sorted(name for name, v in self.violations.items() if v)

    def to_dict(self) -> dict[str, Any]:
        return {"ok": self.ok, "violations": self.violations}


def _postings(events: list[dict]) -> list[dict]:
    return [e for e in events if e.get("kind") in POSTING_KINDS]


def _check_conservation(report: dict) -> list[str]:
    problems = []
    buckets: dict[str, int] = {}
    deposited = withdrawn = 0
    for e in _postings(report["events"]):
        src, dst, amount = e["src"], e["dst"], e["amount"]
        if src == EXTERNAL:
            deposited += amount
        else:
            buckets[src] = buckets.get(src, 0) - amount
            if buckets[src] < 0:
                problems.append(f"event {e['seq']}: {src} goes negative")
        if dst == EXTERNAL:
            withdrawn += amount
        else:
            buckets[dst] = buckets.get(dst, 0) + amount
        if deposited - withdrawn != sum(buckets.values()):
            problems.append(f"event {e['seq']}: books out of balance")

    bal = report["balances"]
    expected = {f"account:{a}": v for a, v in bal["accounts"].items()}
    expected.update({f"pool:{n}": v for n, v in bal["pools"].items()})
    expected.update({"custody": bal["custody"], "fee:market": bal["fee_market"],
                     "fee:protocol": bal["fee_protocol"]})
    for name in sorted(set(expected) | set(buckets)):
        if expected.get(name, 0) != buckets.get(name, 0):
            problems.append(f"{name}: reported {expected.get(name, 0)}, replayed {buckets.get(name, 0)}")
    if bal["total_deposited"] != deposited or bal["total_withdrawn"] != withdrawn:
        problems.append("reported deposit/withdrawal totals differ from the event log")
    held = sum(expected.values())
    if bal["total_deposited"] - bal["total_withdrawn"] != held:
        problems.append("reported balances do not sum to net deposits")
    checksum = report.get("checksum", {})
    if checksum.get("held") != held or checksum.get("net_deposits") != deposited - withdrawn:
        problems.append("checksum does not match balances")
    return problems


def _check_pool_identity(report: dict) -> list[str]:
    """Recompute every pool from the purchase history alone."""
    params = MarketParams(**report["params"])
    holders: dict[tuple[int, int], tuple[int, int]] = {}  # lot -> (price, acquired_at)
    expected: dict[int, int] = {}
    charged: dict[int, int] = {}

    def owed(price: int, span: int) -> int:
        return price * params.tax_bps * span // (BPS * params.period)

    for e in report["events"]:
        kind = e["kind"]
        if kind == "purchase":
            key = (e["frame"], e["bin"])
            if key in holders:
                price, since = holders[key]
                expected[e["frame"]] = expected.get(e["frame"], 0) + owed(price, e["time"] - since)
            holders[key] = (e["price"], e["time"])
        elif kind == "finalized":
            n = e["frame"]
            close = trading_close(n, params)
            for (frame, _), (price, since) in sorted(holders.items()):
                if frame == n:
                    expected[n] = expected.get(n, 0) + owed(price, close - since)
        elif kind == "tax_charge":
            charged[e["frame"]] = charged.get(e["frame"], 0) + e["amount"]

    problems = []
    for n in sorted(set(expected) | set(charged)):
        if expected.get(n, 0) != charged.get(n, 0):
            problems.append(f"frame {n}: charged {charged.get(n, 0)}, ownership log implies {expected.get(n, 0)}")
    for key, summary in report["frames"].items():
        if summary["pool"] != charged.get(int(key), 0):
            problems.append(f"frame {key}: reported pool {summary['pool']} != charged {charged.get(int(key), 0)}")
    return problems


def _check_distribution(report: dict) -> list[str]:
    problems = []
    charged: dict[int, int] = {}
    for e in report["events"]:
        if e["kind"] == "tax_charge":
            charged[e["frame"]] = charged.get(e["frame"], 0) + e["amount"]
        if e["kind"] != "resolution":
            continue
        n = e["frame"]
        fees = e["fee_market"] + e["fee_protocol"]
        if e["pool"] != charged.get(n, 0):
            problems.append(f"frame {n}: resolved pool {e['pool']} != taxes charged {charged.get(n, 0)}")
        if e["invalid_reason"] is None:
            if e["reward"] + fees != e["pool"]:
                problems.append(f"frame {n}: reward + fees != pool")
        else:
            refunds = e["refunds"]
            if sum(refunds.values()) + fees + e["dust"] != e["pool"]:
                problems.append(f"frame {n}: refunds + fees + dust != pool")
            if e["dust"] and e["dust"] >= len(refunds):
                problems.append(f"frame {n}: dust {e['dust']} not below recipient count {len(refunds)}")
    return problems


def verify_report(report: SimReport | dict) -> CheckSummary:
    """Re-derive conservation, pool identity and full distribution from the event log."""
    data = report.to_dict() if isinstance(report, SimReport) else report
    return CheckSummary({
        "conservation": _check_conservation(data),
        "pool_identity": _check_pool_identity(data),
        "full_distribution": _check_distribution(data),
    })


def render_table(report: SimReport | dict) -> str:
    """Human-readable summary derived from the machine report."""
    data = report.to_dict() if isinstance(report, SimReport) else report
    bal = data["balances"]
    lines = ["accounts", f"  {'account':<16}{'free balance':>16}"]
    for account, amount in bal["accounts"].items():
        lines.append(f"  {account:<16}{amount:>16}")
    lines += [
        "",
        f"custody {bal['custody']}  fee_market {bal['fee_market']}  fee_protocol {bal['fee_protocol']}",
        f"deposited {bal['total_deposited']}  withdrawn {bal['total_withdrawn']}",
        "",
        "frames",
        f"  {'frame':>5} {'state':<10}{'pool':>10}{'rate':>8}{'bin':>6}  {'winner/reason':<16}{'reward':>10}",
    ]
    for key, fr in data["frames"].items():
        res = fr["resolution"] or {}
        who = res.get("winner") or res.get("invalid_reason") or "-"
        rate = res.get("reported_rate")
        wbin = res.get("winning_bin")
        lines.append(
            f"  {key:>5} {fr.get('state', '-'):<10}{fr['pool']:>10}"
            f"{'-' if rate is None else rate:>8}{'-' if wbin is None else wbin:>6}"
            f"  {who:<16}{res.get('reward', 0):>10}"
        )
    rejected = [a for a in data["actions"] if a["status"] == "rejected"]
    if rejected:
        lines += ["", "rejected actions"]
        for a in rejected:
            lines.append(f"  #{a['index']} t={a['time']} {a['type']} {a.get('actor', '')}: {a['error']}")
    return "\n".join(lines) + "\n"
