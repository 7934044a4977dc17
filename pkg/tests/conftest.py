from __future__ import annotations

import pytest

from htaxmarket import Market, MarketParams

_criteria: list[tuple[str, str]] = []


@pytest.fixture
def params() -> MarketParams:
    # 10% per 100 s period, 2% + 1% fees, bins of width 10
    return MarketParams(
        initial_timestamp=1000, period=100, granularity=10, tax_bps=1000,
        market_fee_bps=200, protocol_fee_bps=100, reporting_interval=30,
    )


@pytest.fixture
def market(params) -> Market:
    return Market(params)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and "criterion" in report.nodeid:
        if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
            _criteria.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _criteria:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
