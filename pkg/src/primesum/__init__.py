"""Exact prime sums, their asymptotic expansions, and the Mandl/Hassani/Robin inequalities."""

__version__ = "0.1.0"

from .prime_engine import PrimeStore, SieveConfig, build_store, store_for  # noqa: E402
from .inequalities import InequalityKind, check, find_threshold, scan  # noqa: E402
from .asymptotics import cipolla_p, sum_expansion  # noqa: E402

__all__ = [
    "PrimeStore",
    "SieveConfig",
    "build_store",
    "store_for",
    "InequalityKind",
    "check",
    "find_threshold",
    "scan",
    "cipolla_p",
    "sum_expansion",
]
