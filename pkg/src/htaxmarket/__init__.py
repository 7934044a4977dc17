"""Off-chain reference model of a Harberger-tax prediction market."""

from .errors import MarketError
from .ledger import Ledger
from .market import FrameRecord, Market, Ownership, PurchaseReceipt
from .market_core import (
    ContractState,
    LotId,
    MarketParams,
    bin_bounds,
    bin_of_rate,
    contract_state,
    frame_bounds,
    frame_of_time,
    is_valid_purchase_frame,
    maturity,
    trading_close,
)
from .oracle import AmmPair, ReportingState, Snapshot, twap
from .resolution import InvalidReason, Resolution, SettlementEntry
from .scenario import Action, Scenario, load_scenario
from .sim import CheckSummary, SimReport, run, verify_report
from .tax import accrued_tax, max_tax

__all__ = [
    "Action", "AmmPair", "CheckSummary", "ContractState", "FrameRecord", "InvalidReason",
    "Ledger", "LotId", "Market", "MarketError", "MarketParams", "Ownership", "PurchaseReceipt",
    "ReportingState", "Resolution", "Scenario", "SettlementEntry", "SimReport", "Snapshot",
    "accrued_tax", "bin_bounds", "bin_of_rate", "contract_state", "frame_bounds",
    "frame_of_time", "is_valid_purchase_frame", "load_scenario", "max_tax", "maturity",
    "run", "trading_close", "twap", "verify_report",
]
