# /prefix_filter/utils/fingerprinting.py
"""
Prefix Filter Fingerprinting Utilities
Features: Seeded 64-bit Mixing, Multiply-High Range Reduction, Non-Power-of-Two Bin Counts,
Vectorized Batch Fingerprints, Spare-Key Packing.

FP(x) = (bin(x), fp(x)) where the mini-fingerprint fp(x) = (quotient, remainder).
The bin index and the mini-fingerprint come from two independent hash words.
"""

import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from prefix_filter import BIN_CAPACITY, DEFAULT_LOAD_FACTOR, QUOTIENT_RANGE, REMAINDER_BITS

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def hash64(key: int, seed: int) -> int:
    """Seeded 64-bit mixer (SplitMix64 finalizer over key ^ seed); numpy integer keys are accepted."""
    # numpy scalars wrap at 64 bits; the masked arithmetic below needs Python ints
    key, seed = operator.index(key), operator.index(seed)
    z = (((key ^ seed) & MASK64) + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def hash64_array(keys, seed: int) -> np.ndarray:
    """Vectorized hash64 over an array of 64-bit keys; bit-identical to hash64."""
    z = np.asarray(keys, dtype=np.uint64) ^ np.uint64(seed & MASK64)
    z = z + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def mix64(x: int) -> int:
    """Unseeded mixer, used to expand a master seed."""
    return hash64(x, 0)


class HashSeed(NamedTuple):
    """Two 64-bit seed words, one per independent hash invocation."""

    seed0: int
    seed1: int

    @classmethod
    def from_master(cls, master: int) -> "HashSeed":
        """Derive both words from one master seed by repeated mixing."""
        s0 = mix64(master & MASK64)
        s1 = mix64(s0)
        return cls(s0, s1)


class Fingerprint(NamedTuple):
    """FP(x) = (bin, quotient, remainder); (quotient, remainder) orders lexicographically."""

    bin: int
    quotient: int
    remainder: int

    @property
    def mini(self) -> tuple:
        return (self.quotient, self.remainder)


def _as_fraction(alpha) -> Fraction:
    return Fraction(str(alpha)).limit_denominator(1 << 31) if isinstance(alpha, float) else Fraction(alpha)


@dataclass(frozen=True)
class FilterParams:
    """
    Sizing constants of one filter instance.
    - m = ceil(n / (alpha * k)) bins, computed exactly from alpha as a fraction.
    - s = Q * 2^R mini-fingerprint values; with the defaults k/s = 1/256.
    """

    n: int
    alpha: Fraction
    k: int = BIN_CAPACITY
    Q: int = QUOTIENT_RANGE
    R: int = REMAINDER_BITS
    m: int = field(init=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        alpha = _as_fraction(self.alpha)
        if not 0 < alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if self.k < 1 or self.Q < 1 or self.R < 1:
            raise ValueError("k, Q and R must be positive")
        if self.k > self.Q << self.R:
            raise ValueError(f"k={self.k} exceeds the mini-fingerprint range {self.Q << self.R}")
        object.__setattr__(self, "alpha", alpha)
        m = -((-self.n * alpha.denominator) // (alpha.numerator * self.k))  # ceil
        object.__setattr__(self, "m", max(1, m))
        if self.m * self.s > 1 << 64:
            raise ValueError(f"m*s = {self.m * self.s} does not fit in a 64-bit spare key")

    @classmethod
    def from_load(cls, n: int, alpha=DEFAULT_LOAD_FACTOR, k: int = BIN_CAPACITY,
                  Q: int = QUOTIENT_RANGE, R: int = REMAINDER_BITS) -> "FilterParams":
        return cls(n=n, alpha=alpha, k=k, Q=Q, R=R)

    @property
    def s(self) -> int:
        return self.Q << self.R

    @property
    def p(self) -> float:
        return 1.0 / self.m

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(2 * math.pi * self.k)


def fingerprint_of(key: int, params: FilterParams, seed: HashSeed) -> Fingerprint:
    """Map a 64-bit key to (bin, quotient, remainder)."""
    h1 = hash64(key, seed.seed0)
    h2 = hash64(key, seed.seed1)
    return Fingerprint(
        (h1 * params.m) >> 64,
        ((h2 >> 32) * params.Q) >> 32,
        h2 & ((1 << params.R) - 1),
    )


def fingerprints_of(keys, params: FilterParams, seed: HashSeed):
    """
    Batch version of fingerprint_of.
    Returns three uint64 arrays (bins, quotients, remainders).
    """
    keys = np.asarray(keys, dtype=np.uint64)
    h1 = hash64_array(keys, seed.seed0)
    h2 = hash64_array(keys, seed.seed1)
    if params.m < 1 << 32:
        # 64x32 multiply-high split into two exact 64-bit products
        m = np.uint64(params.m)
        hi = (h1 >> np.uint64(32)) * m
        lo = ((h1 & np.uint64(0xFFFFFFFF)) * m) >> np.uint64(32)
        bins = (hi + lo) >> np.uint64(32)
    else:
        bins = np.fromiter(((int(h) * params.m) >> 64 for h in h1.tolist()), dtype=np.uint64, count=len(h1))
    quotients = ((h2 >> np.uint64(32)) * np.uint64(params.Q)) >> np.uint64(32)
    remainders = h2 & np.uint64((1 << params.R) - 1)
    return bins, quotients, remainders


def spare_key_of(fp: Fingerprint, params: FilterParams) -> int:
    """Injective packing bin*s + quotient*2^R + remainder."""
    return fp.bin * params.s + (fp.quotient << params.R) + fp.remainder


def unpack_spare_key(key: int, params: FilterParams) -> Fingerprint:
    """Inverse of spare_key_of."""
    b, mini = divmod(key, params.s)
    return Fingerprint(b, mini >> params.R, mini & ((1 << params.R) - 1))


# Example Usage (Run this to test)
if __name__ == "__main__":
    params = FilterParams.from_load(950)
    seed = HashSeed.from_master(42)
    fp = fingerprint_of(12345, params, seed)
    print(f"m={params.m}, FP(12345)={fp}, spare key={spare_key_of(fp, params)}")
