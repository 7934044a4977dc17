"""Scenario documents: JSON with top-level ``market``, ``price_path`` and ``actions``.

Example::

    {
      "market": {"initial_timestamp": 1100, "period": 100, "granularity": 10,
                 "tax_bps": 1000, "market_fee_bps": 200, "protocol_fee_bps": 100,
                 "reporting_interval": 30},
      "price_path": [[1100, 25]],
      "actions": [
        {"time": 1100, "actor": "A", "type": "deposit", "amount": 100},
        {"time": 1100, "actor": "A", "type": "buy", "frame": 1, "bin": 2, "price": 1000},
        {"time": 1250, "type": "report", "frame": 1},
        {"time": 1300, "type": "resolve", "frame": 1},
        {"time": 1300, "actor": "A", "type": "settle", "frame": 1}
      ]
    }

Money, rates and times are integers only. Actions must be in non-decreasing
time order; actions sharing a timestamp run in file order.
"""

from __future__ import annotations

import json
from dataclasses import MISSING, dataclass, fields
from typing import Any

from .errors import InvalidParams, ParseError, ValidationError
from .market_core import MarketParams

# action type -> (required fields, optional fields); "actor" handled separately
ACTION_FIELDS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "deposit": (("amount",), ()),
    "buy": (("frame", "bin", "price"), ()),
    "report": ((), ("frame",)),
    "resolve": (("frame",), ()),
    "settle": (("frame",), ()),
    "withdraw": ((), ()),
}
NEEDS_ACTOR = {"deposit", "buy", "settle", "withdraw"}


@dataclass(frozen=True)
class Action:
    time: int
    type: str
    actor: str | None = None
    amount: int | None = None
    frame: int | None = None
    bin: int | None = None
    price: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}


@dataclass(frozen=True)
class Scenario:
    market_params: MarketParams
    price_path: tuple[tuple[int, int], ...]
    actions: tuple[Action, ...]

    @property
    def accounts(self) -> list[str]:
        return sorted({a.actor for a in self.actions if a.actor is not None and a.type in NEEDS_ACTOR})

    def to_dict(self) -> dict[str, Any]:
        return {
            "market": self.market_params.to_dict(),
            "price_path": [list(p) for p in self.price_path],
            "actions": [a.to_dict() for a in self.actions],
        }


def _int(value: Any, where: str, minimum: int | None = 0) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError(f"expected an integer, got {value!r}", where)
    if minimum is not None and value < minimum:
        raise ValidationError(f"must be >= {minimum}, got {value}", where)
    return value


def _market(doc: Any) -> MarketParams:
    if not isinstance(doc, dict):
        raise ValidationError("expected an object", "market")
    known = {f.name for f in fields(MarketParams)}
    for key in doc:
        if key not in known:
            raise ValidationError("unknown parameter", f"market.{key}")
    for f in fields(MarketParams):
        if f.name not in doc and f.default is MISSING:
            raise ValidationError("missing required parameter", f"market.{f.name}")
    try:
        return MarketParams(**doc)
    except InvalidParams as exc:
        msg = str(exc)
        name = next((k for k in sorted(known, key=len, reverse=True) if msg.startswith(k)), None)
        raise ValidationError(msg, f"market.{name}" if name else "market") from None


def _price_path(doc: Any) -> tuple[tuple[int, int], ...]:
    if not isinstance(doc, list):
        raise ValidationError("expected a list of [time, rate] pairs", "price_path")
    path = []
    for i, point in enumerate(doc):
        where = f"price_path[{i}]"
        if not isinstance(point, list) or len(point) != 2:
            raise ValidationError("expected a [time, rate] pair", where)
        t = _int(point[0], f"{where}[0]", minimum=None)
        rate = _int(point[1], f"{where}[1]")
        if path and t <= path[-1][0]:
            raise ValidationError(f"time {t} does not follow {path[-1][0]}", f"{where}[0]")
        path.append((t, rate))
    return tuple(path)


def _action(doc: Any, i: int) -> Action:
    where = f"actions[{i}]"
    if not isinstance(doc, dict):
        raise ValidationError("expected an object", where)
    kind = doc.get("type")
    if kind not in ACTION_FIELDS:
        raise ValidationError(f"unknown action type {kind!r}", f"{where}.type")
    required, optional = ACTION_FIELDS[kind]
    allowed = {"time", "type", "actor", *required, *optional}
    for key in doc:
        if key not in allowed:
            raise ValidationError(f"not allowed for {kind!r}", f"{where}.{key}")
    if "time" not in doc:
        raise ValidationError("missing", f"{where}.time")
    values: dict[str, Any] = {"time": _int(doc["time"], f"{where}.time", minimum=None), "type": kind}
    actor = doc.get("actor")
    if kind in NEEDS_ACTOR and actor is None:
        raise ValidationError("missing", f"{where}.actor")
    if actor is not None:
        if not isinstance(actor, str) or not actor:
            raise ValidationError("expected a non-empty string", f"{where}.actor")
        values["actor"] = actor
    for key in required:
        if key not in doc:
            raise ValidationError("missing", f"{where}.{key}")
    for key in (*required, *optional):
        if key in doc:
            values[key] = _int(doc[key], f"{where}.{key}")
    return Action(**values)


def parse_scenario(doc: Any) -> Scenario:
    """Validate an already-decoded scenario document."""
    if not isinstance(doc, dict):
        raise ValidationError("scenario must be a JSON object")
    for key in doc:
        if key not in ("market", "price_path", "actions"):
            raise ValidationError("unknown top-level key", key)
    if "market" not in doc:
        raise ValidationError("missing", "market")
    params = _market(doc["market"])
    path = _price_path(doc.get("price_path", []))
    raw_actions = doc.get("actions", [])
    if not isinstance(raw_actions, list):
        raise ValidationError("expected a list", "actions")
    actions = tuple(_action(a, i) for i, a in enumerate(raw_actions))
    for i in range(1, len(actions)):
        if actions[i].time < actions[i - 1].time:
            raise ValidationError(
                f"time {actions[i].time} precedes previous action at {actions[i - 1].time}",
                f"actions[{i}].time",
            )
    return Scenario(params, path, actions)


def load_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return parse_scenario(doc)
