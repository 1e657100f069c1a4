# /prefix_filter/core/pocket_dictionary.py
"""
Pocket Dictionary - 32-byte succinct bounded multiset of (quotient, remainder) pairs.
Features: Unary Occupancy Header, Select-Free Cutoff Search, Max-Element Tracking,
Bit-Exact Serialized Form.

Layout of one PD(25, 8, 25) record (little-endian):
    bytes 0..6   control word (56 bits)
                   bits 0..49   header: occ(0) zeros, 1, occ(1) zeros, 1, ..., occ(24) zeros, 1,
                                then 1-padding up to bit 49
                   bit  50      overflowed flag
                   bits 51..55  quotient of the maximum element (valid when overflowed and full)
    bytes 7..31  body: 25 one-byte remainders, grouped by quotient, sorted inside each list,
                 vacant slots zero-filled

The low-level *_at functions work on any writable buffer at a byte offset so that the
filter's bin table (one contiguous bytearray) is updated in place.
"""

from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from prefix_filter import BIN_CAPACITY, PD_BYTES, QUOTIENT_RANGE, REMAINDER_BITS

HEADER_BITS = QUOTIENT_RANGE + BIN_CAPACITY  # 50
HEADER_MASK = (1 << HEADER_BITS) - 1
OVERFLOW_BIT = 1 << HEADER_BITS
MAX_Q_SHIFT = HEADER_BITS + 1
MAX_Q_MASK = 0x1F
CONTROL_BYTES = 7
BODY_OFFSET = CONTROL_BYTES
EMPTY_RECORD = HEADER_MASK.to_bytes(CONTROL_BYTES, "little") + bytes(BIN_CAPACITY)


class PDEntry(NamedTuple):
    """One PD element; tuple ordering is the lexicographic (quotient, remainder) order."""

    quotient: int
    remainder: int


class QueryPath(Enum):
    """Which branch of the PD search answered a query."""

    CUTOFF = "cutoff"  # v_r == 0
    SINGLE_MATCH = "single_match"  # v_r has one set bit, answered by one rank
    SELECT_FALLBACK = "select_fallback"


def rank(word: int, j: int) -> int:
    """Number of 1 bits of word in positions [0, j]."""
    return (word & ((2 << j) - 1)).bit_count()


def select(word: int, j: int) -> int:
    """Index of the j-th (1-indexed) set bit of a 64-bit word, or 64 if there is none."""
    if j < 1 or (word & 0xFFFFFFFFFFFFFFFF).bit_count() < j:
        return 64
    lo, hi = 0, 63
    while lo < hi:
        mid = (lo + hi) >> 1
        if (word & ((2 << mid) - 1)).bit_count() >= j:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _list_bounds(header: int, q: int):
    """Body interval [start, end) of list q."""
    before = select(header, q) if q else -1
    after = select(header, q + 1)
    return before + 1 - q, after - q


# Low-level operations on a buffer at an offset


def control_at(buf, off: int) -> int:
    return int.from_bytes(buf[off:off + CONTROL_BYTES], "little")


def _write_control(buf, off: int, control: int):
    buf[off:off + CONTROL_BYTES] = control.to_bytes(CONTROL_BYTES, "little")


def size_at(buf, off: int) -> int:
    """t, the number of stored elements."""
    return HEADER_BITS - (control_at(buf, off) & HEADER_MASK).bit_count()


def is_overflowed_at(buf, off: int) -> bool:
    return bool(control_at(buf, off) & OVERFLOW_BIT)


def match_mask(body, r: int) -> int:
    """v_r: bit i set iff body[i] == r, over the occupied body only."""
    v = 0
    i = body.find(r)
    while i >= 0:
        v |= 1 << i
        i = body.find(r, i + 1)
    return v


def _select_search(header: int, body, q: int, r: int) -> bool:
    start, end = _list_bounds(header, q)
    pos = bisect_right(body, r, start, end)
    return pos > start and body[pos - 1] == r


def query_path_at(buf, off: int, q: int, r: int):
    """PD search with the cutoff branches; returns (answer, QueryPath)."""
    header = control_at(buf, off) & HEADER_MASK
    t = HEADER_BITS - header.bit_count()
    body = bytes(buf[off + BODY_OFFSET:off + BODY_OFFSET + t])
    i = body.find(r)
    if i < 0:
        return False, QueryPath.CUTOFF
    if body.find(r, i + 1) < 0:
        w = 1 << (i + q)  # v_r << q
        return (header & (w - 1)).bit_count() == q and not header & w, QueryPath.SINGLE_MATCH
    return _select_search(header, body, q, r), QueryPath.SELECT_FALLBACK


def query_at(buf, off: int, q: int, r: int) -> bool:
    return query_path_at(buf, off, q, r)[0]


def select_query_at(buf, off: int, q: int, r: int) -> bool:
    """Select-only search, no cutoff; reference for the fast path."""
    header = control_at(buf, off) & HEADER_MASK
    t = HEADER_BITS - header.bit_count()
    return _select_search(header, bytes(buf[off + BODY_OFFSET:off + BODY_OFFSET + t]), q, r)


def _last_quotient(header: int, t: int) -> int:
    """Quotient of the last non-empty list (t >= 1)."""
    zeros = ~header & ((1 << (t + QUOTIENT_RANGE)) - 1)
    last_zero = zeros.bit_length() - 1
    return last_zero - (t - 1)


def _insert_sorted(buf, off: int, control: int, q: int, r: int) -> int:
    """Insert (q, r) into a PD with t < k; returns the new control word."""
    header = control & HEADER_MASK
    start, end = _list_bounds(header, q)
    base = off + BODY_OFFSET
    pos = bisect_right(buf, r, base + start, base + end) - base
    bit = end + q  # the new zero goes right before list q's closing 1
    low = header & ((1 << bit) - 1)
    header = (low | ((header >> bit) << (bit + 1))) & HEADER_MASK
    buf[base + pos + 1:base + BIN_CAPACITY] = buf[base + pos:base + BIN_CAPACITY - 1]
    buf[base + pos] = r
    return (control & ~HEADER_MASK) | header


def _set_max_quotient(control: int, header: int) -> int:
    mq = _last_quotient(header, BIN_CAPACITY)
    return (control & ~(MAX_Q_MASK << MAX_Q_SHIFT)) | (mq << MAX_Q_SHIFT)


def insert_at(buf, off: int, q: int, r: int) -> bool:
    """Insert (q, r); False (state untouched) when the PD is full."""
    control = control_at(buf, off)
    if HEADER_BITS - (control & HEADER_MASK).bit_count() >= BIN_CAPACITY:
        return False
    control = _insert_sorted(buf, off, control, q, r)
    if control & OVERFLOW_BIT and (control & HEADER_MASK).bit_count() == QUOTIENT_RANGE:
        control = _set_max_quotient(control, control & HEADER_MASK)
    _write_control(buf, off, control)
    return True


def max_at(buf, off: int):
    """(quotient, remainder) of the maximal element; caller guarantees a full PD."""
    control = control_at(buf, off)
    if control & OVERFLOW_BIT:
        return (control >> MAX_Q_SHIFT) & MAX_Q_MASK, buf[off + BODY_OFFSET + BIN_CAPACITY - 1]
    header = control & HEADER_MASK
    t = HEADER_BITS - header.bit_count()
    q = _last_quotient(header, t)
    start, end = _list_bounds(header, q)
    return q, max(buf[off + BODY_OFFSET + start:off + BODY_OFFSET + end])


def mark_overflowed_at(buf, off: int):
    control = control_at(buf, off) | OVERFLOW_BIT
    header = control & HEADER_MASK
    if HEADER_BITS - header.bit_count() == BIN_CAPACITY:
        control = _set_max_quotient(control, header)
    _write_control(buf, off, control)


def evict_max_and_insert_at(buf, off: int, q: int, r: int):
    """
    Replace the maximum of a full PD with (q, r), which must be strictly smaller.
    Returns the evicted (quotient, remainder).
    """
    old_max = max_at(buf, off)
    if (q, r) >= old_max:
        raise ValueError(f"entry {(q, r)} is not below the PD maximum {old_max}")
    control = control_at(buf, off)
    header = control & HEADER_MASK
    # drop the last zero (the element at body[k-1]) and re-pad with a 1 on top
    last_zero = (~header & HEADER_MASK).bit_length() - 1
    header = (header & ((1 << last_zero) - 1)) | ((header >> (last_zero + 1)) << last_zero) | (1 << (HEADER_BITS - 1))
    buf[off + BODY_OFFSET + BIN_CAPACITY - 1] = 0
    control = _insert_sorted(buf, off, (control & ~HEADER_MASK) | header, q, r)
    control = _set_max_quotient(control | OVERFLOW_BIT, control & HEADER_MASK)
    _write_control(buf, off, control)
    return old_max


def decode_at(buf, off: int):
    """Sorted list of PDEntry held by the record."""
    header = control_at(buf, off) & HEADER_MASK
    entries = []
    q = 0
    i = 0
    bit = 0
    while q < QUOTIENT_RANGE:
        if header >> bit & 1:
            q += 1
        else:
            entries.append(PDEntry(q, buf[off + BODY_OFFSET + i]))
            i += 1
        bit += 1
    return entries


def encode_into(buf, off: int, entries, overflowed: bool = False):
    """Write the canonical record for a multiset of entries."""
    entries = sorted(PDEntry(*e) for e in entries)
    if len(entries) > BIN_CAPACITY:
        raise ValueError(f"{len(entries)} entries exceed PD capacity {BIN_CAPACITY}")
    header = 0
    bit = 0
    q = 0
    for e in entries:
        if not 0 <= e.quotient < QUOTIENT_RANGE or not 0 <= e.remainder < 1 << REMAINDER_BITS:
            raise ValueError(f"entry {e} out of range")
        while q < e.quotient:
            header |= 1 << bit
            bit += 1
            q += 1
        bit += 1
    header |= HEADER_MASK & ~((1 << bit) - 1)  # remaining closing ones plus padding
    control = header
    if overflowed:
        control |= OVERFLOW_BIT
        if len(entries) == BIN_CAPACITY:
            control |= entries[-1].quotient << MAX_Q_SHIFT
    _write_control(buf, off, control)
    body = bytes(e.remainder for e in entries)
    buf[off + BODY_OFFSET:off + PD_BYTES] = body + bytes(BIN_CAPACITY - len(body))


# Value type


@dataclass
class PDState:
    """
    One 32-byte pocket dictionary record.
    - raw is the normative serialized form.
    - All mutation goes through the pd_* functions below.
    """

    raw: bytearray = field(default_factory=lambda: bytearray(EMPTY_RECORD))

    def __post_init__(self):
        if len(self.raw) != PD_BYTES:
            raise ValueError(f"PD record must be {PD_BYTES} bytes, got {len(self.raw)}")
        self.raw = bytearray(self.raw)

    @classmethod
    def from_entries(cls, entries, overflowed: bool = False) -> "PDState":
        pd = cls()
        encode_into(pd.raw, 0, entries, overflowed)
        return pd

    @property
    def header(self) -> int:
        return control_at(self.raw, 0) & HEADER_MASK

    @property
    def size(self) -> int:
        return size_at(self.raw, 0)

    @property
    def is_full(self) -> bool:
        return self.size == BIN_CAPACITY

    def entries(self):
        return decode_at(self.raw, 0)

    def copy(self) -> "PDState":
        return PDState(bytearray(self.raw))


def pd_query(pd: PDState, e) -> bool:
    return query_at(pd.raw, 0, e[0], e[1])


def pd_query_path(pd: PDState, e):
    return query_path_at(pd.raw, 0, e[0], e[1])


def pd_select_query(pd: PDState, e) -> bool:
    return select_query_at(pd.raw, 0, e[0], e[1])


def pd_insert(pd: PDState, e) -> bool:
    """True when inserted, False when the PD is full."""
    return insert_at(pd.raw, 0, e[0], e[1])


def pd_max(pd: PDState) -> PDEntry:
    return PDEntry(*max_at(pd.raw, 0))


def pd_evict_max_and_insert(pd: PDState, e) -> PDEntry:
    return PDEntry(*evict_max_and_insert_at(pd.raw, 0, e[0], e[1]))


def pd_mark_overflowed(pd: PDState):
    mark_overflowed_at(pd.raw, 0)


def pd_is_overflowed(pd: PDState) -> bool:
    return is_overflowed_at(pd.raw, 0)


# Example Usage (Run this to test)
if __name__ == "__main__":
    pd = PDState()
    for entry in [(1, 13), (2, 15), (3, 3), (5, 0), (5, 5), (5, 15), (7, 6)]:
        pd_insert(pd, entry)
    print(f"header={pd.header:050b} body={list(pd.raw[BODY_OFFSET:BODY_OFFSET + pd.size])}")
    print(f"(5,5) -> {pd_query(pd, (5, 5))}, (5,6) -> {pd_query(pd, (5, 6))}")
