# /prefix_filter/core/spare.py
"""
Spare Filters - second-level incremental filters over packed 64-bit fingerprint keys.
Features: Flexible Blocked Bloom (default, one 512-bit block per key, never overflows),
Exact Set (zero false positives, capacity-bounded, for isolating bin-table error).

Blob format (little-endian):
    kind u8 | capacity u64 | seed0 u64 | seed1 u64 | kind-specific payload
    bbf:   bits_per_key u32 | probes u32 | block count u64 | insert count u64 | blocks (64 bytes each)
    exact: key count u64 | sorted keys (u64 each)
"""

import logging
import math
import struct
from abc import ABC, abstractmethod

import numpy as np

from prefix_filter.core.errors import SerializationError, SpareOverflowError
from prefix_filter.utils.config import get_config
from prefix_filter.utils.fingerprinting import HashSeed, hash64

logger = logging.getLogger(__name__)

BLOCK_BITS = 512
WORDS_PER_BLOCK = BLOCK_BITS // 64
PROBE_BITS = 9
KIND_BBF = 0
KIND_EXACT = 1

_HEAD = struct.Struct("<BQQQ")
_BBF_HEAD = struct.Struct("<IIQQ")
_COUNT = struct.Struct("<Q")


class SpareFilter(ABC):
    """
    Contract shared by every spare.
    - No false negatives: a key answers True once inserted.
    - Deterministic for a fixed seed.
    - space_bits reports the allocated storage.
    """

    kind: int
    name: str
    blocks_per_access: int = 1

    def __init__(self, capacity: int, seed: HashSeed):
        if capacity < 1:
            raise ValueError(f"spare capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self.seed = HashSeed(*seed)

    @abstractmethod
    def insert(self, key: int):
        """Insert a packed key; raises SpareOverflowError when the spare cannot take it."""

    @abstractmethod
    def query(self, key: int) -> bool:
        """True if the key may have been inserted."""

    @property
    @abstractmethod
    def space_bits(self) -> int:
        """Bits of allocated storage."""

    @property
    @abstractmethod
    def occupancy(self) -> int:
        """Number of insert calls absorbed (bbf) or distinct keys held (exact)."""

    @abstractmethod
    def _payload(self) -> bytes:
        ...

    def to_bytes(self) -> bytes:
        return _HEAD.pack(self.kind, self.capacity, self.seed.seed0, self.seed.seed1) + self._payload()

    @staticmethod
    def from_bytes(data: bytes) -> "SpareFilter":
        """Decode any spare blob, dispatching on its kind tag."""
        if len(data) < _HEAD.size:
            raise SerializationError(SerializationError.TRUNCATED, "spare header is truncated")
        kind, capacity, s0, s1 = _HEAD.unpack_from(data, 0)
        cls = SPARE_CLASSES_BY_TAG.get(kind)
        if cls is None:
            raise SerializationError(SerializationError.BAD_SPARE_KIND, f"unknown spare kind tag {kind}")
        try:
            return cls._from_payload(capacity, HashSeed(s0, s1), memoryview(data)[_HEAD.size:])
        except SerializationError:
            raise
        except ValueError as exc:
            raise SerializationError(SerializationError.BAD_HEADER, f"invalid spare parameters: {exc}") from exc


class BlockedBloomSpare(SpareFilter):
    """
    Flexible blocked Bloom filter.
    - Block count = ceil(capacity * bits_per_key / 512), any positive integer.
    - Block chosen by multiply-high of hash64(key, seed0); probes are 9-bit slices.
    """

    kind = KIND_BBF
    name = "bbf"
    blocks_per_access = 1

    def __init__(self, capacity: int, seed: HashSeed, bits_per_key: int = None, probes: int = None):
        super().__init__(capacity, seed)
        self.bits_per_key = int(bits_per_key or get_config("bbf_bits_per_key"))
        self.probes = int(probes or get_config("bbf_probes"))
        if not 1 <= self.probes <= 8:
            raise ValueError(f"probes must lie in [1, 8], got {self.probes}")
        self.num_blocks = max(1, math.ceil(self.capacity * self.bits_per_key / BLOCK_BITS))
        self.blocks = np.zeros((self.num_blocks, WORDS_PER_BLOCK), dtype=np.uint64)
        self._inserts = 0

    def _locate(self, key: int):
        block = (hash64(key, self.seed.seed0) * self.num_blocks) >> 64
        h2 = hash64(key, self.seed.seed1)
        # 8 x 9 bits do not fit in h2: the eighth slice comes from a re-mix of h2
        positions = [(h2 >> (PROBE_BITS * i)) & 0x1FF for i in range(min(self.probes, 7))]
        if self.probes == 8:
            positions.append(hash64(h2, self.seed.seed0) & 0x1FF)
        return block, positions

    def insert(self, key: int):
        block, positions = self._locate(key)
        words = self.blocks[block]
        for pos in positions:
            words[pos >> 6] |= np.uint64(1 << (pos & 63))
        self._inserts += 1

    def query(self, key: int) -> bool:
        block, positions = self._locate(key)
        words = self.blocks[block]
        for pos in positions:
            if not int(words[pos >> 6]) >> (pos & 63) & 1:
                return False
        return True

    @property
    def space_bits(self) -> int:
        return self.num_blocks * BLOCK_BITS

    @property
    def occupancy(self) -> int:
        return self._inserts

    @property
    def fill_ratio(self) -> float:
        return int(np.unpackbits(self.blocks.view(np.uint8)).sum()) / self.space_bits

    def _payload(self) -> bytes:
        return (_BBF_HEAD.pack(self.bits_per_key, self.probes, self.num_blocks, self._inserts)
                + self.blocks.astype("<u8").tobytes())

    @classmethod
    def _from_payload(cls, capacity: int, seed: HashSeed, payload) -> "BlockedBloomSpare":
        if len(payload) < _BBF_HEAD.size:
            raise SerializationError(SerializationError.TRUNCATED, "bbf spare header is truncated")
        bits_per_key, probes, num_blocks, inserts = _BBF_HEAD.unpack_from(payload, 0)
        body = payload[_BBF_HEAD.size:]
        if len(body) != num_blocks * BLOCK_BITS // 8:
            raise SerializationError(SerializationError.TRUNCATED, "bbf spare blocks are truncated")
        spare = cls(capacity, seed, bits_per_key, probes)
        if spare.num_blocks != num_blocks:
            raise SerializationError(SerializationError.BAD_HEADER, "bbf block count does not match capacity")
        spare.blocks = np.frombuffer(bytes(body), dtype="<u8").astype(np.uint64).reshape(num_blocks, WORDS_PER_BLOCK)
        spare._inserts = inserts
        return spare


class ExactSetSpare(SpareFilter):
    """Exact set of packed keys (false positive rate 0); overflows past capacity."""

    kind = KIND_EXACT
    name = "exact"
    blocks_per_access = 1

    def __init__(self, capacity: int, seed: HashSeed = HashSeed(0, 0)):
        super().__init__(capacity, seed)
        self.keys = set()

    def insert(self, key: int):
        if key in self.keys:
            return
        if len(self.keys) >= self.capacity:
            raise SpareOverflowError(f"exact spare is full ({self.capacity} keys)")
        self.keys.add(key)

    def query(self, key: int) -> bool:
        return key in self.keys

    @property
    def space_bits(self) -> int:
        return 64 * self.capacity

    @property
    def occupancy(self) -> int:
        return len(self.keys)

    def _payload(self) -> bytes:
        ordered = sorted(self.keys)
        return _COUNT.pack(len(ordered)) + np.array(ordered, dtype="<u8").tobytes()

    @classmethod
    def _from_payload(cls, capacity: int, seed: HashSeed, payload) -> "ExactSetSpare":
        if len(payload) < _COUNT.size:
            raise SerializationError(SerializationError.TRUNCATED, "exact spare header is truncated")
        (count,) = _COUNT.unpack_from(payload, 0)
        body = payload[_COUNT.size:]
        if len(body) != 8 * count:
            raise SerializationError(SerializationError.TRUNCATED, "exact spare keys are truncated")
        if count > capacity:
            raise SerializationError(SerializationError.BAD_HEADER, f"{count} keys exceed capacity {capacity}")
        spare = cls(capacity, seed)
        spare.keys = set(np.frombuffer(bytes(body), dtype="<u8").tolist())
        return spare


SPARE_CLASSES = {"bbf": BlockedBloomSpare, "exact": ExactSetSpare}
SPARE_CLASSES_BY_TAG = {cls.kind: cls for cls in SPARE_CLASSES.values()}


def spare_headroom(kind: str) -> float:
    """Capacity multiplier applied on top of n' for each spare kind."""
    if kind == "bbf":
        return float(get_config("bbf_headroom"))
    if kind == "exact":
        return float(get_config("exact_headroom"))
    raise ValueError(f"unknown spare kind {kind!r}; expected one of {sorted(SPARE_CLASSES)}")


def make_spare(kind: str, n_prime: int, seed: HashSeed) -> SpareFilter:
    """Build a spare of the given kind sized for n' forwarded fingerprints."""
    capacity = max(1, math.ceil(n_prime * spare_headroom(kind)))
    spare = SPARE_CLASSES[kind](capacity, seed)
    logger.info("Built %s spare: n'=%d capacity=%d space=%d bits", kind, n_prime, capacity, spare.space_bits)
    return spare


# Example Usage (Run this to test)
if __name__ == "__main__":
    spare = make_spare("bbf", 1000, HashSeed.from_master(7))
    for key in range(1000):
        spare.insert(key)
    false_hits = sum(spare.query(key) for key in range(10_000, 20_000))
    print(f"BBF spare: {spare.num_blocks} blocks, empirical FPR {false_hits / 10_000:.4%}")
