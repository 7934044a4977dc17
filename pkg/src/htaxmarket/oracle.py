"""Simulated AMM rate oracle and the two-window TWAP reporting protocol.

The pair is modelled as a piecewise-constant spot-rate path with an exact
cumulative accumulator, which is the only thing the market reads from it.
Reserve mechanics are not simulated.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .errors import (
    MissingSnapshot,
    NegativeRate,
    NonMonotonicCumulative,
    NonMonotonicTime,
    TimeBeforePath,
    ZeroInterval,
)
from .market_core import MarketParams, reporting_windows

WINDOW1 = "window1"
WINDOW2 = "window2"


class AmmPair:
    """Spot-rate path with a running ``rate * seconds`` accumulator."""

    def __init__(self) -> None:
        self._times: list[int] = []
        self._rates: list[int] = []
        self._cumulative: list[int] = []

    @property
    def price_path(self) -> list[tuple[int, int]]:
        return list(zip(self._times, self._rates))

    @property
    def spot_rate(self) -> int | None:
        return self._rates[-1] if self._rates else None

    def set_spot_rate(self, t: int, rate: int) -> None:
        if rate < 0:
            raise NegativeRate(f"rate must be >= 0, got {rate}")
        if self._times and t <= self._times[-1]:
            raise NonMonotonicTime(f"change-point t={t} must follow t={self._times[-1]}")
        cumulative = 0
        if self._times:
            cumulative = self._cumulative[-1] + self._rates[-1] * (t - self._times[-1])
        self._times.append(t)
        self._rates.append(rate)
        self._cumulative.append(cumulative)

    def cumulative_at(self, t: int) -> int:
        if not self._times or t < self._times[0]:
            raise TimeBeforePath(f"no rate defined at t={t}")
        i = bisect.bisect_right(self._times, t) - 1
        return self._cumulative[i] + self._rates[i] * (t - self._times[i])


def twap(cum1: int, t1: int, cum2: int, t2: int) -> int:
    if t2 <= t1:
        raise ZeroInterval(f"interval [{t1}, {t2}] has no length")
    if cum2 < cum1:
        raise NonMonotonicCumulative(f"cumulative decreased from {cum1} to {cum2}")
    return (cum2 - cum1) // (t2 - t1)


@dataclass(frozen=True)
class Snapshot:
    taken_at: int
    cumulative: int


@dataclass
class ReportingState:
    window1: Snapshot | None = None
    window2: Snapshot | None = None

    def complete(self) -> bool:
        return self.window1 is not None and self.window2 is not None

    def to_dict(self) -> dict:
        def dump(s: Snapshot | None):
            return None if s is None else {"taken_at": s.taken_at, "cumulative": s.cumulative}

        return {WINDOW1: dump(self.window1), WINDOW2: dump(self.window2)}


def window_for(n: int, now: int, params: MarketParams) -> str | None:
    """Which reporting window of frame ``n`` contains ``now``, if any."""
    (lo1, hi1), (lo2, hi2) = reporting_windows(n, params)
    if lo1 <= now <= hi1:
        return WINDOW1
    if lo2 < now <= hi2:
        return WINDOW2
    return None


def take_snapshot(state: ReportingState, pair: AmmPair, n: int, now: int, params: MarketParams) -> str | None:
    """Record a snapshot into whichever window ``now`` falls in.

    Later snapshots overwrite earlier ones. Out-of-window attempts, and
    attempts before the pair has any rate, are silent no-ops.
    """
    which = window_for(n, now, params)
    if which is None:
        return None
    try:
        snap = Snapshot(now, pair.cumulative_at(now))
    except TimeBeforePath:
        return None
    setattr(state, which, snap)
    return which


def rate_from_snapshots(state: ReportingState) -> int:
    """TWAP between the two window snapshots, divided by their actual spacing."""
    if state.window1 is None:
        raise MissingSnapshot(WINDOW1)
    if state.window2 is None:
        raise MissingSnapshot(WINDOW2)
    return twap(state.window1.cumulative, state.window1.taken_at,
                state.window2.cumulative, state.window2.taken_at)
