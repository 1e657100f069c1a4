import math
import struct

import pytest

from prefix_filter.core.errors import SerializationError, SpareOverflowError
from prefix_filter.core.spare import (
    BLOCK_BITS,
    BlockedBloomSpare,
    ExactSetSpare,
    SpareFilter,
    make_spare,
)
from prefix_filter.utils.fingerprinting import HashSeed

SEED = HashSeed.from_master(99)


def test_bbf_no_false_negatives_and_low_fpr():
    spare = BlockedBloomSpare(10_000, SEED)
    assert spare.num_blocks == math.ceil(10_000 * 12 / BLOCK_BITS)
    for key in range(10_000):
        spare.insert(key * 7919)
    assert all(spare.query(key * 7919) for key in range(10_000))
    false_hits = sum(spare.query(key) for key in range(1 << 40, (1 << 40) + 20_000))
    assert false_hits / 20_000 < 0.02
    assert spare.occupancy == 10_000
    assert 0 < spare.fill_ratio < 1


def test_bbf_never_overflows():
    spare = BlockedBloomSpare(10, SEED)
    for key in range(1_000):
        spare.insert(key)
    assert spare.query(999)


def test_bbf_hash_count_validation():
    with pytest.raises(ValueError):
        BlockedBloomSpare(10, SEED, probes=9)
    with pytest.raises(ValueError):
        BlockedBloomSpare(0, SEED)


def test_exact_spare_overflow_and_duplicates():
    spare = ExactSetSpare(3)
    spare.insert(1)
    spare.insert(2)
    spare.insert(2)
    spare.insert(3)
    assert spare.occupancy == 3
    with pytest.raises(SpareOverflowError):
        spare.insert(4)
    spare.insert(3)
    assert spare.query(1) and not spare.query(4)
    assert spare.space_bits == 64 * 3


def test_spare_overflow_is_an_overflow_error():
    spare = ExactSetSpare(1)
    spare.insert(5)
    with pytest.raises(OverflowError):
        spare.insert(6)


@pytest.mark.parametrize("kind", ["bbf", "exact"])
def test_spare_blob_round_trip(kind):
    spare = make_spare(kind, 500, SEED)
    for key in range(0, 5_000, 11):
        spare.insert(key)
    restored = SpareFilter.from_bytes(spare.to_bytes())
    assert type(restored) is type(spare)
    assert restored.capacity == spare.capacity
    assert restored.seed == spare.seed
    assert restored.to_bytes() == spare.to_bytes()
    assert [restored.query(k) for k in range(5_000)] == [spare.query(k) for k in range(5_000)]


def test_spare_blob_errors():
    blob = make_spare("bbf", 100, SEED).to_bytes()
    with pytest.raises(SerializationError) as excinfo:
        SpareFilter.from_bytes(blob[:-1])
    assert excinfo.value.code == SerializationError.TRUNCATED
    with pytest.raises(SerializationError) as excinfo:
        SpareFilter.from_bytes(bytes([7]) + blob[1:])
    assert excinfo.value.code == SerializationError.BAD_SPARE_KIND
    with pytest.raises(SerializationError) as excinfo:
        SpareFilter.from_bytes(blob[:5])
    assert excinfo.value.code == SerializationError.TRUNCATED


def test_make_spare_headroom():
    assert make_spare("bbf", 1_000, SEED).capacity == 2_000
    assert make_spare("exact", 935, SEED).capacity in (1_000, 1_001)
    assert make_spare("exact", 0, SEED).capacity == 1
    with pytest.raises(ValueError):
        make_spare("cuckoo", 100, SEED)


def test_spare_blob_inconsistent_parameters():
    def code_of(blob):
        with pytest.raises(SerializationError) as excinfo:
            SpareFilter.from_bytes(blob)
        return excinfo.value.code

    bbf = bytearray(make_spare("bbf", 100, SEED).to_bytes())
    struct.pack_into("<I", bbf, 25 + 4, 9)
    assert code_of(bytes(bbf)) == SerializationError.BAD_HEADER

    exact = ExactSetSpare(2, SEED)
    exact.insert(1)
    exact.insert(2)
    over_full = bytearray(exact.to_bytes())
    struct.pack_into("<Q", over_full, 1, 1)
    assert code_of(bytes(over_full)) == SerializationError.BAD_HEADER

    empty = bytearray(ExactSetSpare(1, SEED).to_bytes())
    struct.pack_into("<Q", empty, 1, 0)
    assert code_of(bytes(empty)) == SerializationError.BAD_HEADER
