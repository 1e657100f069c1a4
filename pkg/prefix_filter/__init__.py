# /prefix_filter/__init__.py
"""
Prefix Filter SDK - incremental approximate-membership filter
Bin table of 32-byte pocket dictionaries plus a pluggable spare filter.
Features: Single-Bin Queries, Prefix-Invariant Eviction, Analytic Bounds, Bench Harness.
"""

import logging

# Pocket dictionary geometry (PD(25, 8, 25) in a 32-byte record)
BIN_CAPACITY = 25  # k
QUOTIENT_RANGE = 25  # Q
REMAINDER_BITS = 8  # R
PD_BYTES = 32

# Filter defaults
DEFAULT_LOAD_FACTOR = 0.95  # alpha
DEFAULT_SPARE_KIND = "bbf"
SPARE_SLACK = 1.1  # n' = 1.1 * E[X]

__version__ = "1.0.0"
__author__ = "Prefix Filter SDK"
__description__ = "Prefix filter with pocket-dictionary bins, spare filters and analysis math."

logging.getLogger(__name__).addHandler(logging.NullHandler())

from prefix_filter.utils.fingerprinting import Fingerprint, FilterParams, HashSeed  # noqa: E402
from prefix_filter.core.prefix_filter import PrefixFilter  # noqa: E402

__all__ = [
    "BIN_CAPACITY",
    "QUOTIENT_RANGE",
    "REMAINDER_BITS",
    "PD_BYTES",
    "DEFAULT_LOAD_FACTOR",
    "DEFAULT_SPARE_KIND",
    "SPARE_SLACK",
    "Fingerprint",
    "FilterParams",
    "HashSeed",
    "PrefixFilter",
]

# Example Usage (Run this to test)
if __name__ == "__main__":
    pf = PrefixFilter.new(10_000)
    pf.insert_many(range(10_000))
    print(f"Prefix filter: {pf.params.m} bins, 42 present: {pf.query(42)}")
