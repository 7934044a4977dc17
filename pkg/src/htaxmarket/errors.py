"""Exception hierarchy shared by every market operation."""

from __future__ import annotations


class MarketError(Exception):
    """Base class for rejected market operations.

    Operations validate before mutating, so a raised ``MarketError`` always
    leaves the market untouched.
    """


class InvalidParams(MarketError, ValueError):
    pass


class TimeBeforeMarketDebut(MarketError):
    pass


class NegativeRate(MarketError, ValueError):
    pass


class InvalidFrame(MarketError):
    pass


class PurchaseAfterClose(MarketError):
    pass


class InsufficientBalance(MarketError):
    pass


class MoneyOverflow(MarketError, OverflowError):
    pass


class FrameStillOpen(MarketError):
    pass


class AlreadyFinalized(MarketError):
    pass


class NonMonotonicTime(MarketError):
    pass


class TimeBeforePath(MarketError):
    pass


class ZeroInterval(MarketError):
    pass


class NonMonotonicCumulative(MarketError):
    pass


class MissingSnapshot(MarketError):
    def __init__(self, which: str):
        super().__init__(f"no snapshot recorded in {which}")
        self.which = which


class NotMatured(MarketError):
    pass


class AlreadyResolved(MarketError):
    pass


class NotResolved(MarketError):
    pass


class NothingToClaim(MarketError):
    pass


class ScenarioError(Exception):
    """Problem with a scenario document (not a market rejection)."""


class ParseError(ScenarioError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


class ValidationError(ScenarioError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"field {field!r}: {message}" if field else message)
        self.field = field
