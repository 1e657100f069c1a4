# /prefix_filter/core/oracles.py
"""
Reference Models for Differential Testing
Features: Naive Pocket Dictionary, Shadow Prefix Filter, Exact Membership,
Balls-Into-Bins Monte Carlo.

These models restate the semantics on plain Python containers. They share no code
with the bit-packed pocket dictionary, the filter or the spares.
"""

import math
from bisect import bisect_right, insort
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum

import numpy as np


class NaivePD:
    """
    Pocket dictionary as a sorted multiset of (quotient, remainder) pairs.
    - Arbitrary Q, R and capacity k.
    - Raises the same errors as the packed record.
    """

    def __init__(self, k: int = 25, Q: int = 25, R: int = 8):
        self.k = k
        self.Q = Q
        self.R = R
        self.entries = []
        self.overflowed = False

    def _check(self, e):
        q, r = e
        if not 0 <= q < self.Q or not 0 <= r < 1 << self.R:
            raise ValueError(f"entry {e} out of range")
        return (q, r)

    @property
    def size(self) -> int:
        return len(self.entries)

    def is_full(self) -> bool:
        return len(self.entries) >= self.k

    def query(self, e) -> bool:
        return tuple(e) in self.entries

    def insert(self, e) -> bool:
        if self.is_full():
            return False
        insort(self.entries, self._check(e))
        return True

    def max(self):
        if not self.entries:
            raise ValueError("max of an empty PD")
        return self.entries[-1]

    def evict_max_and_insert(self, e):
        e = self._check(e)
        if not self.is_full():
            raise ValueError("eviction needs a full PD")
        old_max = self.entries[-1]
        if e >= old_max:
            raise ValueError(f"entry {e} is not below the PD maximum {old_max}")
        self.entries.pop()
        insort(self.entries, e)
        self.overflowed = True
        return old_max

    def mark_overflowed(self):
        self.overflowed = True

    def is_overflowed(self) -> bool:
        return self.overflowed


def naive_pd_apply(model: NaivePD, op):
    """Apply op = (name, *args) to the model and return the result."""
    name, *args = op
    if name == "query":
        return model.query(*args)
    if name == "insert":
        return model.insert(*args)
    if name == "max":
        return model.max()
    if name == "evict_max_and_insert":
        return model.evict_max_and_insert(*args)
    if name == "mark_overflowed":
        return model.mark_overflowed()
    if name == "is_overflowed":
        return model.is_overflowed()
    if name == "size":
        return model.size
    raise ValueError(f"unknown PD operation {name!r}")


class Route(Enum):
    BIN_ONLY = "bin-only"
    SPARE = "spare"


class ShadowPrefixFilter:
    """
    Unbounded per-bin sorted lists of mini-fingerprints.
    - The stored prefix of bin i is its k smallest elements.
    - Everything else is the forwarded multiset (what the spare should have seen).
    """

    def __init__(self, k: int = 25):
        self.k = k
        self.bins = defaultdict(list)
        self.forwarded = Counter()

    def insert(self, fp):
        """Add fp = (bin, quotient, remainder); returns the fingerprint forwarded, if any."""
        b, q, r = fp
        routed = self.bins[b]
        mini = (q, r)
        if len(routed) < self.k:
            insort(routed, mini)
            return None
        kth = routed[self.k - 1]
        insort(routed, mini)
        out = (b, *mini) if mini >= kth else (b, *kth)
        self.forwarded[out] += 1
        return out

    def stored_prefix(self, b: int):
        return self.bins[b][:self.k]

    def overflowed(self, b: int) -> bool:
        return len(self.bins[b]) > self.k

    def contains(self, fp) -> bool:
        """Ideal answer of a filter with a perfect spare."""
        b, q, r = fp
        routed = self.bins[b]
        i = bisect_right(routed, (q, r))
        return i > 0 and routed[i - 1] == (q, r)


def shadow_route(shadow: ShadowPrefixFilter, fp, op_kind: str = "query") -> Route:
    """Where the real filter must go for fp: a query reaches the spare only above an overflowed bin's max."""
    b, q, r = fp
    routed = shadow.bins.get(b, [])
    if op_kind == "insert":
        return Route.SPARE if len(routed) >= shadow.k else Route.BIN_ONLY
    if op_kind != "query":
        raise ValueError(f"unknown op kind {op_kind!r}")
    if len(routed) > shadow.k and (q, r) > routed[shadow.k - 1]:
        return Route.SPARE
    return Route.BIN_ONLY


class ExactMembership:
    """Ground-truth set of inserted keys, kept as a sorted uint64 array."""

    def __init__(self, keys=()):
        self.keys = np.unique(np.asarray(keys, dtype=np.uint64))

    def add_many(self, keys):
        self.keys = np.union1d(self.keys, np.asarray(keys, dtype=np.uint64))

    def contains_many(self, keys) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.uint64)
        if not len(self.keys):
            return np.zeros(len(keys), dtype=bool)
        idx = np.searchsorted(self.keys, keys)
        idx[idx == len(self.keys)] = 0
        return self.keys[idx] == keys

    def __contains__(self, key) -> bool:
        return bool(self.contains_many([key])[0])

    def __len__(self) -> int:
        return len(self.keys)


@dataclass(frozen=True)
class MonteCarloConfig:
    n: int
    m: int
    k: int
    trials: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if self.n < 0 or self.m < 1 or self.k < 0:
            raise ValueError(f"invalid balls-into-bins instance n={self.n}, m={self.m}, k={self.k}")


_MC_CHUNK_CELLS = 1 << 22


def balls_into_bins_mc(cfg: MonteCarloConfig):
    """
    Throw n balls into m bins, trials times; X = sum over bins of max(B_i - k, 0).
    Returns (mean of X/n, standard error of that mean).
    """
    if cfg.n == 0:
        return 0.0, 0.0
    rng = np.random.default_rng(cfg.seed)
    per_chunk = max(1, _MC_CHUNK_CELLS // max(cfg.n, cfg.m))
    fractions = []
    done = 0
    while done < cfg.trials:
        t = min(per_chunk, cfg.trials - done)
        throws = rng.integers(0, cfg.m, size=(t, cfg.n))
        # per-trial bincount through row offsets
        cells = (throws + (np.arange(t) * cfg.m)[:, None]).ravel()
        loads = np.bincount(cells, minlength=t * cfg.m).reshape(t, cfg.m)
        overflow = np.maximum(loads - cfg.k, 0).sum(axis=1)
        fractions.append(overflow / cfg.n)
        done += t
    fractions = np.concatenate(fractions)
    stderr = float(fractions.std(ddof=1) / math.sqrt(len(fractions))) if len(fractions) > 1 else 0.0
    return float(fractions.mean()), stderr


# Example Usage (Run this to test)
if __name__ == "__main__":
    print(f"n=2, m=2, k=1: {balls_into_bins_mc(MonteCarloConfig(2, 2, 1, trials=100_000))}")
    print(f"n=10^5, k=25: {balls_into_bins_mc(MonteCarloConfig(100_000, 4_000, 25, trials=20))}")
