# /prefix_filter/examples/quickstart_example.py
"""
Prefix Filter Quickstart Example
Features: Build, Batched Insert, Queries, Stats, Serialization Round-Trip, Analytic Bounds.
"""

import numpy as np

from prefix_filter.core.prefix_filter import PrefixFilter
from prefix_filter.utils.analysis import compute_bounds


def run_quickstart(n: int = 50_000, seed: int = 7) -> dict:
    """
    Walk through the filter life cycle.
    - Insert n random keys and confirm every one answers Yes.
    - Measure the false positive rate on fresh keys.
    - Serialize, reload, and compare answers.
    """
    print("=== Prefix Filter Quickstart ===")
    rng = np.random.default_rng(seed)
    keys = np.unique(rng.integers(0, 1 << 63, size=n, dtype=np.uint64))
    probes = rng.integers(1 << 63, np.iinfo(np.uint64).max, size=n, dtype=np.uint64)

    pf = PrefixFilter.new(n, 0.95, "bbf", seed=seed)
    pf.insert_many(keys)
    print(f"Bins: {pf.params.m}, inserted: {len(pf)}")

    missed = int((~pf.query_many(keys)).sum())
    print(f"False negatives: {missed}")

    fpr = float(pf.query_many(probes).mean())
    bounds = compute_bounds(pf.params)
    print(f"Empirical FPR: {fpr:.4%} (bound with an exact spare: {bounds.fpr_bound:.4%})")

    stats = pf.stats()
    print(f"Bits per key: {stats['bits_per_key']:.2f}, spare forwards: {stats['insert_spare_forwards']}")

    restored = PrefixFilter.from_bytes(pf.to_bytes())
    same = bool((restored.query_many(probes) == pf.query_many(probes)).all())
    print(f"Round-trip answers identical: {same}")

    return {"false_negatives": missed, "fpr": fpr, "bits_per_key": stats["bits_per_key"],
            "round_trip_identical": same, "expected_spare": bounds.expected_spare}


# Example Usage (Run this to test)
if __name__ == "__main__":
    run_quickstart()
