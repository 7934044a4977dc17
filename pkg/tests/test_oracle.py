from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from htaxmarket import AmmPair, LotId, Market, MarketParams, twap
from htaxmarket.errors import (
    MissingSnapshot,
    NonMonotonicCumulative,
    NonMonotonicTime,
    NotMatured,
    TimeBeforePath,
    ZeroInterval,
)


def path_pair(points):
    pair = AmmPair()
    for t, r in points:
        pair.set_spot_rate(t, r)
    return pair


def brute_mean(points, t1, t2):
    """Time-weighted mean rate over [t1, t2) summed second by second."""
    total = 0
    for s in range(t1, t2):
        total += [r for t, r in points if t <= s][-1]
    return Fraction(total, t2 - t1)


def test_set_spot_rate_accumulates():
    pair = path_pair([(0, 5)])
    assert pair.cumulative_at(0) == 0
    pair.set_spot_rate(100, 7)
    assert pair.cumulative_at(100) == 500
    with pytest.raises(NonMonotonicTime):
        pair.set_spot_rate(100, 9)


@pytest.mark.parametrize("points, t, expected", [
    ([(0, 5)], 0, 0),
    ([(0, 5)], 100, 500),
    ([(0, 5), (100, 7)], 150, 850),
])
def test_cumulative_at(points, t, expected):
    assert path_pair(points).cumulative_at(t) == expected


def test_cumulative_before_path():
    with pytest.raises(TimeBeforePath):
        path_pair([(10, 5)]).cumulative_at(9)
    with pytest.raises(TimeBeforePath):
        AmmPair().cumulative_at(0)


@pytest.mark.parametrize("args, expected", [((0, 0, 500, 100), 5), ((500, 100, 850, 150), 7), ((0, 0, 10, 3), 3)])
def test_twap(args, expected):
    assert twap(*args) == expected


def test_twap_errors():
    with pytest.raises(ZeroInterval):
        twap(0, 100, 0, 100)
    with pytest.raises(NonMonotonicCumulative):
        twap(10, 0, 5, 10)


@pytest.fixture
def traded(params):
    market = Market(params)
    market.deposit("A", 10_000, 1000)
    market.buy_lot(LotId(1, 0), "A", 100, 1000)
    return market


def test_snapshot_windows(traded):
    traded.pair.set_spot_rate(0, 5)
    assert traded.report_snapshot(1, 1150) == "window1"
    assert traded.report_snapshot(1, 1170) == "window1"
    assert traded.report_snapshot(1, 1185) == "window2"
    assert traded.report_snapshot(1, 1099) is None
    assert traded.report_snapshot(1, 1201) is None
    assert traded.report_snapshot(3, 1150) is None  # never traded


def test_latest_snapshot_per_window_wins(traded):
    traded.pair.set_spot_rate(0, 5)
    traded.report_snapshot(1, 1120)
    traded.report_snapshot(1, 1150)
    assert traded.frames[1].reporting.window1.taken_at == 1150


def test_reported_rate_uses_actual_spacing(traded):
    traded.pair.set_spot_rate(0, 5)
    traded.pair.set_spot_rate(1150, 6)
    traded.report_snapshot(1, 1150)
    traded.report_snapshot(1, 1185)
    rep = traded.frames[1].reporting
    assert (rep.window1.cumulative, rep.window2.cumulative) == (5750, 5960)
    assert traded.reported_rate(1, 1200) == 6
    with pytest.raises(NotMatured):
        traded.reported_rate(1, 1199)


def test_reported_rate_missing_window2(traded):
    traded.pair.set_spot_rate(0, 5)
    traded.report_snapshot(1, 1150)
    with pytest.raises(MissingSnapshot) as err:
        traded.reported_rate(1, 1200)
    assert err.value.which == "window2"


def test_purchase_triggers_snapshot_of_current_frame(traded):
    traded.pair.set_spot_rate(1000, 4)
    traded.buy_lot(LotId(3, 0), "A", 100, 1160)
    assert traded.frames[1].reporting.window1.taken_at == 1160


def test_boundary_report_reaches_ending_frame(traded):
    traded.pair.set_spot_rate(1000, 4)
    traded.buy_lot(LotId(2, 0), "A", 100, 1050)
    assert traded.trigger_reporting(1200) == [(1, "window2"), (2, "window1")]


def test_snapshot_touches_only_its_frame(traded):
    traded.pair.set_spot_rate(1000, 4)
    traded.buy_lot(LotId(2, 0), "A", 100, 1050)
    before = traded.frames[2]
    events = len(traded.events)
    balances = traded.ledger.balances()
    traded.report_snapshot(1, 1150)
    assert traded.frames[2] == before
    assert traded.ledger.balances() == balances
    assert [e["kind"] for e in traded.events[events:]] == ["snapshot"]


segments = st.lists(st.tuples(st.integers(1, 40), st.integers(0, 500)), min_size=1, max_size=20)


@settings(max_examples=300, deadline=None)
@given(segments, st.data())
def test_twap_matches_brute_force(segs, data):
    points, t = [], 0
    for dt, rate in segs:
        points.append((t, rate))
        t += dt
    pair = path_pair(points)
    t1 = data.draw(st.integers(0, t))
    t2 = data.draw(st.integers(t1 + 1, t + 20))
    got = twap(pair.cumulative_at(t1), t1, pair.cumulative_at(t2), t2)
    mean = brute_mean(points, t1, t2)
    assert got == mean.numerator // mean.denominator
    window = [r for tt, r in points if t1 < tt < t2] + [[r for tt, r in points if tt <= t1][-1]]
    assert min(window) <= got <= max(window)


@given(st.integers(0, 10**6), st.integers(1100, 1170), st.integers(1171, 1200))
def test_constant_path_reports_constant(rate, t1, t2):
    params = MarketParams(initial_timestamp=1000, period=100, granularity=10, tax_bps=1000,
                          market_fee_bps=0, protocol_fee_bps=0, reporting_interval=30)
    market = Market(params)
    market.deposit("A", 100, 1000)
    market.buy_lot(LotId(1, 0), "A", 0, 1000)
    market.pair.set_spot_rate(900, rate)
    market.report_snapshot(1, t1)
    market.report_snapshot(1, t2)
    assert market.reported_rate(1, 1200) == rate


@given(st.lists(st.integers(1100, 1170), min_size=1, max_size=10))
def test_overwrite_keeps_latest(times):
    params = MarketParams(initial_timestamp=1000, period=100, granularity=10, tax_bps=0,
                          market_fee_bps=0, protocol_fee_bps=0, reporting_interval=30)
    market = Market(params)
    market.buy_lot(LotId(1, 0), "A", 0, 1000)
    market.pair.set_spot_rate(0, 3)
    for t in sorted(times):
        market.report_snapshot(1, t)
    assert market.frames[1].reporting.window1.taken_at == max(times)
