# /prefix_filter/core/prefix_filter.py
"""
Prefix Filter Engine - bin table of pocket dictionaries plus a spare.
Features: Prefix-Invariant Eviction, Single-Bin Query Routing, Instrumentation Counters,
Batched Operations, Checksummed Serialization.

Every bin holds the k lexicographically smallest mini-fingerprints ever routed to it; the
rest live in the spare. A query reads one bin, and the spare only when the bin has
overflowed and the queried mini-fingerprint is above the bin maximum.
"""

import logging
import struct
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np
from cryptography.hazmat.primitives import hashes

from prefix_filter import DEFAULT_LOAD_FACTOR, PD_BYTES
from prefix_filter.core import pocket_dictionary as pd
from prefix_filter.core.errors import CapacityExceededError, SerializationError, SpareOverflowError
from prefix_filter.core.spare import SPARE_CLASSES, SpareFilter, make_spare
from prefix_filter.utils import analysis
from prefix_filter.utils.config import get_config
from prefix_filter.utils.fingerprinting import (
    FilterParams,
    Fingerprint,
    HashSeed,
    fingerprint_of,
    fingerprints_of,
    spare_key_of,
)

logger = logging.getLogger(__name__)

MAGIC = b"PFLT"
FORMAT_VERSION = 1
# magic | version u32 | n u64 | alpha num u32 | alpha den u32 | k u32 | Q u32 | R u32 | m u64
# | seed0 u64 | seed1 u64 | inserted u64
_HEADER = struct.Struct("<4sIQIIIIIQQQQ")
_SPARE_HEAD = struct.Struct("<BQ")
_DIGEST_BYTES = 32


@dataclass
class InstrumentationCounters:
    """Operation counters; spare_blocks_touched charges the spare's blocks per access."""

    insert_total: int = 0
    insert_spare_forwards: int = 0
    query_total: int = 0
    query_spare_accesses: int = 0
    bins_touched: int = 0
    spare_blocks_touched: int = 0

    def snapshot(self) -> "InstrumentationCounters":
        return InstrumentationCounters(**asdict(self))

    def since(self, earlier: "InstrumentationCounters") -> "InstrumentationCounters":
        """Counter deltas accumulated after the earlier snapshot."""
        now, before = asdict(self), asdict(earlier)
        return InstrumentationCounters(**{key: now[key] - before[key] for key in now})

    def reset(self):
        for key in asdict(self):
            setattr(self, key, 0)


def _digest(data: bytes) -> bytes:
    h = hashes.Hash(hashes.SHA256())
    h.update(data)
    return h.finalize()


def _params_from_header(n, a_num, a_den, k, Q, R, m, inserted) -> FilterParams:
    """Validate the decoded header fields; every inconsistency is BAD_HEADER."""
    if (k, Q, R) != (pd.BIN_CAPACITY, pd.QUOTIENT_RANGE, pd.REMAINDER_BITS):
        raise SerializationError(SerializationError.BAD_HEADER, f"unsupported bin layout k={k} Q={Q} R={R}")
    if a_den == 0 or not 0 < a_num <= a_den:
        raise SerializationError(SerializationError.BAD_HEADER, f"alpha {a_num}/{a_den} outside (0, 1]")
    try:
        params = FilterParams(n=n, alpha=Fraction(a_num, a_den), k=k, Q=Q, R=R)
    except ValueError as exc:
        raise SerializationError(SerializationError.BAD_HEADER, str(exc)) from exc
    if params.m != m:
        raise SerializationError(SerializationError.BAD_HEADER, f"bin count {m} does not match n={n} and alpha")
    if inserted > n:
        raise SerializationError(SerializationError.BAD_HEADER, f"inserted={inserted} exceeds n={n}")
    return params


class PrefixFilter:
    """
    Incremental prefix filter.
    - insert(key) follows the eviction procedure: a full bin keeps its k smallest
      mini-fingerprints and forwards the largest one to the spare.
    - query(key) reads exactly one bin and, when the routing rule says so, the spare.
    - No deletions, no resizing; single writer while building.
    """

    def __init__(self, params: FilterParams, seed: HashSeed, spare: SpareFilter,
                 spare_kind: str, record_forwards: bool = False):
        if spare_kind not in SPARE_CLASSES:
            raise ValueError(f"unknown spare kind {spare_kind!r}; expected one of {sorted(SPARE_CLASSES)}")
        if (params.k, params.Q, params.R) != (pd.BIN_CAPACITY, pd.QUOTIENT_RANGE, pd.REMAINDER_BITS):
            raise ValueError(f"bin layout supports k={pd.BIN_CAPACITY}, Q={pd.QUOTIENT_RANGE}, "
                             f"R={pd.REMAINDER_BITS} only, got k={params.k}, Q={params.Q}, R={params.R}")
        self.params = params
        self.seed = HashSeed(*seed)
        self.spare = spare
        self.spare_kind = spare_kind
        self.bins = bytearray(pd.EMPTY_RECORD * params.m)
        self.counters = InstrumentationCounters()
        self.inserted = 0
        self.forward_log = [] if record_forwards else None

    @classmethod
    def new(cls, n: int, alpha=None, spare_kind: str = None, seed=None,
            record_forwards: bool = False) -> "PrefixFilter":
        """
        Build an empty filter for at most n keys.
        - m = ceil(n / (alpha * k)) bins.
        - Spare sized from n' = 1.1 E[X] (or the worst-case sizing, per config) times the
          per-kind headroom.
        """
        spare_kind = spare_kind or get_config("spare_kind")
        if seed is None:
            seed = HashSeed.from_master(int(get_config("seed")))
        elif isinstance(seed, int):
            seed = HashSeed.from_master(seed)
        if alpha is None:
            alpha = get_config("max_load_factor") or DEFAULT_LOAD_FACTOR
        params = FilterParams.from_load(
            n, alpha, k=int(get_config("bin_capacity")), Q=int(get_config("quotient_range")),
            R=int(get_config("remainder_bits")),
        )
        sizing = get_config("spare_sizing")
        slack = float(get_config("spare_slack"))
        if sizing == "worst_case":
            n_prime = analysis.spare_capacity_worst_case(params.n, params.k, slack)
        elif sizing == "expected":
            n_prime = analysis.spare_capacity(params.n, params.m, params.k, slack)
        else:
            raise ValueError(f"unknown spare_sizing {sizing!r}")
        spare = make_spare(spare_kind, n_prime, HashSeed.from_master(seed.seed1 ^ seed.seed0))
        logger.info("New prefix filter: n=%d alpha=%s m=%d spare=%s n'=%d",
                    params.n, params.alpha, params.m, spare_kind, n_prime)
        return cls(params, seed, spare, spare_kind, record_forwards)

    # Insertion

    def insert(self, key: int):
        """Insert a key; raises SpareOverflowError if the spare refuses a forwarded fingerprint."""
        self._insert_fingerprint(fingerprint_of(key, self.params, self.seed))

    def insert_many(self, keys):
        """Insert a batch of keys (fingerprints computed with numpy)."""
        bins, quotients, remainders = fingerprints_of(keys, self.params, self.seed)
        for fp in zip(bins.tolist(), quotients.tolist(), remainders.tolist()):
            self._insert_fingerprint(Fingerprint(*fp))

    def _insert_fingerprint(self, fp: Fingerprint):
        if self.inserted >= self.params.n:
            raise CapacityExceededError(f"filter sized for n={self.params.n} keys is full")
        buf = self.bins
        off = fp.bin * PD_BYTES
        if not pd.insert_at(buf, off, fp.quotient, fp.remainder):
            top = pd.max_at(buf, off)
            # on a tie both copies are equal, so forwarding the incoming one leaves the same multisets
            evict = (fp.quotient, fp.remainder) < top
            forwarded = Fingerprint(fp.bin, *top) if evict else fp
            # the spare takes the fingerprint before the bin changes; a refusal leaves the filter as it was
            self._forward(spare_key_of(forwarded, self.params))
            if evict:
                pd.evict_max_and_insert_at(buf, off, fp.quotient, fp.remainder)
            pd.mark_overflowed_at(buf, off)
        counters = self.counters
        counters.insert_total += 1
        counters.bins_touched += 1
        self.inserted += 1

    def _forward(self, spare_key: int):
        try:
            self.spare.insert(spare_key)
        except SpareOverflowError:
            logger.warning("Spare overflow after %d inserts (capacity %d): filter failed",
                           self.inserted, self.spare.capacity)
            raise
        counters = self.counters
        counters.insert_spare_forwards += 1
        counters.spare_blocks_touched += self.spare.blocks_per_access
        if self.forward_log is not None:
            self.forward_log.append(spare_key)

    # Queries

    def query(self, key: int) -> bool:
        """True if key may be in the set; never False for an inserted key."""
        return self._query_fingerprint(fingerprint_of(key, self.params, self.seed))

    def query_many(self, keys) -> np.ndarray:
        bins, quotients, remainders = fingerprints_of(keys, self.params, self.seed)
        out = np.empty(len(bins), dtype=bool)
        for i, fp in enumerate(zip(bins.tolist(), quotients.tolist(), remainders.tolist())):
            out[i] = self._query_fingerprint(Fingerprint(*fp))
        return out

    def _query_fingerprint(self, fp: Fingerprint) -> bool:
        counters = self.counters
        counters.query_total += 1
        counters.bins_touched += 1
        buf = self.bins
        off = fp.bin * PD_BYTES
        if pd.is_overflowed_at(buf, off) and (fp.quotient, fp.remainder) > pd.max_at(buf, off):
            counters.query_spare_accesses += 1
            counters.spare_blocks_touched += self.spare.blocks_per_access
            return self.spare.query(spare_key_of(fp, self.params))
        return pd.query_at(buf, off, fp.quotient, fp.remainder)

    def __contains__(self, key: int) -> bool:
        return self.query(key)

    def __len__(self) -> int:
        return self.inserted

    # Introspection

    def bin_state(self, index: int) -> pd.PDState:
        """Copy of one bin's 32-byte record."""
        off = index * PD_BYTES
        return pd.PDState(bytearray(self.bins[off:off + PD_BYTES]))

    @property
    def bin_table_bits(self) -> int:
        return self.params.m * PD_BYTES * 8

    @property
    def space_bits(self) -> int:
        return self.bin_table_bits + self.spare.space_bits

    def overflowed_bins(self) -> int:
        flags = np.frombuffer(self.bins, dtype=np.uint8).reshape(-1, PD_BYTES)[:, 6] & 0x04
        return int(np.count_nonzero(flags))

    def stats(self) -> dict:
        """Counters, spare occupancy, and space usage at the current load."""
        per_key = self.inserted or None
        load_factor = self.inserted / (self.params.m * self.params.k)
        return {
            **asdict(self.counters),
            "inserted": self.inserted,
            "load": self.inserted / self.params.n,
            "load_factor": load_factor,
            "m": self.params.m,
            "spare_kind": self.spare_kind,
            "spare_capacity": self.spare.capacity,
            "spare_occupancy": self.spare.occupancy,
            "overflowed_bins": self.overflowed_bins(),
            "bin_table_bits": self.bin_table_bits,
            "spare_bits": self.spare.space_bits,
            "total_bits": self.space_bits,
            "bin_table_bits_per_key": self.bin_table_bits / per_key if per_key else None,
            "bits_per_key": self.space_bits / per_key if per_key else None,
        }

    # Serialization

    def to_bytes(self) -> bytes:
        alpha = Fraction(self.params.alpha)
        head = _HEADER.pack(
            MAGIC, FORMAT_VERSION, self.params.n, alpha.numerator, alpha.denominator,
            self.params.k, self.params.Q, self.params.R, self.params.m,
            self.seed.seed0, self.seed.seed1, self.inserted,
        )
        blob = self.spare.to_bytes()
        body = head + bytes(self.bins) + _SPARE_HEAD.pack(self.spare.kind, len(blob)) + blob
        return body + _digest(body)

    serialize = to_bytes

    @classmethod
    def from_bytes(cls, data: bytes) -> "PrefixFilter":
        """Decode a serialized filter; raises SerializationError with a distinct code."""
        data = bytes(data)
        if len(data) < 4 or data[:4] != MAGIC:
            if len(data) < 4 and MAGIC.startswith(data):
                raise SerializationError(SerializationError.TRUNCATED, "stream shorter than the magic")
            raise SerializationError(SerializationError.BAD_MAGIC, f"bad magic {data[:4]!r}")
        if len(data) < _HEADER.size:
            raise SerializationError(SerializationError.TRUNCATED, "header is truncated")
        (_, version, n, a_num, a_den, k, Q, R, m, s0, s1, inserted) = _HEADER.unpack_from(data, 0)
        if version != FORMAT_VERSION:
            raise SerializationError(SerializationError.BAD_VERSION, f"unsupported format version {version}")
        params = _params_from_header(n, a_num, a_den, k, Q, R, m, inserted)
        table_end = _HEADER.size + m * PD_BYTES
        if len(data) < table_end + _SPARE_HEAD.size:
            raise SerializationError(SerializationError.TRUNCATED, "bin table is truncated")
        kind, blob_len = _SPARE_HEAD.unpack_from(data, table_end)
        blob_start = table_end + _SPARE_HEAD.size
        end = blob_start + blob_len
        if len(data) < end + _DIGEST_BYTES:
            raise SerializationError(SerializationError.TRUNCATED, "spare blob or digest is truncated")
        if _digest(data[:end]) != data[end:end + _DIGEST_BYTES]:
            raise SerializationError(SerializationError.BAD_CHECKSUM, "digest mismatch")
        spare = SpareFilter.from_bytes(data[blob_start:end])
        if spare.kind != kind:
            raise SerializationError(SerializationError.BAD_SPARE_KIND, "spare tag does not match blob")
        pf = cls(params, HashSeed(s0, s1), spare, spare.name)
        pf.bins[:] = data[_HEADER.size:table_end]
        pf.inserted = inserted
        logger.info("Loaded prefix filter: n=%d m=%d inserted=%d spare=%s", n, m, inserted, spare.name)
        return pf

    deserialize = from_bytes


# Example Usage (Run this to test)
if __name__ == "__main__":
    pf = PrefixFilter.new(100_000, 0.95)
    keys = np.arange(100_000, dtype=np.uint64)
    pf.insert_many(keys)
    negatives = pf.query_many(np.arange(1 << 40, (1 << 40) + 100_000, dtype=np.uint64))
    print(f"FPR: {negatives.mean():.4%}")
    print(f"Stats: {pf.stats()}")
