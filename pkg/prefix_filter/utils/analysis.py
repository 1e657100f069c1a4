# /prefix_filter/utils/analysis.py
"""
Prefix Filter Analysis Utilities
Features: Binomial Tails (scipy.stats), Expected Spare Occupancy, Stirling Envelopes,
Cantelli/Hoeffding Failure Bounds, FPR and Spare-Access Bounds, Spare Sizing.

Model: n balls (fingerprints) thrown uniformly into m bins of capacity k; X is the
number of balls that do not fit, i.e. the number of fingerprints forwarded to the spare.
"""

import logging
import math
from typing import NamedTuple

from scipy.stats import binom

from prefix_filter import SPARE_SLACK

logger = logging.getLogger(__name__)


def _check(n: int, p: float, j: int):
    if n < 0 or not 0.0 <= p <= 1.0:
        raise ValueError(f"invalid binomial parameters n={n}, p={p}")
    if j < 0 or j > n:
        raise ValueError(f"j={j} outside [0, {n}]")


def binom_logpmf(n: int, p: float, j: int) -> float:
    _check(n, p, j)
    return float(binom.logpmf(j, n, p))


def binom_pmf(n: int, p: float, j: int) -> float:
    """Pr[Bin(n, p) = j]."""
    _check(n, p, j)
    return float(binom.pmf(j, n, p))


def binom_cdf(n: int, p: float, j: int) -> float:
    """Pr[Bin(n, p) <= j]."""
    _check(n, p, j)
    if j == n:
        return 1.0
    return float(binom.cdf(j, n, p))


def binom_sf(n: int, p: float, j: int) -> float:
    """Pr[Bin(n, p) > j]; j may be -1."""
    if j < 0:
        return 1.0
    _check(n, p, j)
    if j == n:
        return 0.0
    return float(binom.sf(j, n, p))


def expected_spare_exact(n: int, m: int, k: int) -> float:
    """
    E[X] for n balls in m bins of capacity k.
    Per bin, E[(B - k)^+] = n*p*Pr[Bin(n-1, p) > k-1] - k*Pr[Bin(n, p) > k] with p = 1/m.
    """
    if m < 1 or k < 1:
        raise ValueError(f"m and k must be positive, got m={m}, k={k}")
    if n <= k:
        return 0.0
    p = 1.0 / m
    per_bin = n * p * binom_sf(n - 1, p, k - 1) - k * binom_sf(n, p, k)
    return max(0.0, m * per_bin)


class ClosedForm(NamedTuple):
    expected: float
    cap: float


def expected_spare_closed(n: int, k: int) -> ClosedForm:
    """E[X] = n(1-p) Pr[Bin(n,p) = k] with p = k/n (m = n/k bins), and the cap n/sqrt(2 pi k)."""
    if not 0 < k <= n:
        raise ValueError(f"need 0 < k <= n, got k={k}, n={n}")
    p = k / n
    return ClosedForm(n * (1.0 - p) * binom_pmf(n, p, k), n / math.sqrt(2 * math.pi * k))


class StirlingEnvelope(NamedTuple):
    t0: float
    t1: float
    lower: float
    upper: float


def stirling_envelope(n: int, p: float, k: int) -> StirlingEnvelope:
    """Robbins-Stirling bracket exp(t)/sqrt(2 pi k (1-p)) around Pr[Bin(n, k/n) = k]."""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    t0 = 1 / (12 * n + 1) - (1 / (12 * k) + 1 / (12 * (n - k)))
    t1 = 1 / (12 * n) - (1 / (12 * k + 1) + 1 / (12 * (n - k) + 1))
    base = 1.0 / math.sqrt(2 * math.pi * k * (1.0 - p))
    return StirlingEnvelope(t0, t1, math.exp(t0) * base, math.exp(t1) * base)


class FailureBound(NamedTuple):
    cantelli: float
    hoeffding: float
    bound: float
    valid: bool  # n >= 5k and k >= 20


def failure_bound(n: int, k: int, delta: float) -> FailureBound:
    """Pr[X > (1 + delta) E[X]] bounded by min(Cantelli, Hoeffding), clamped to [0, 1]."""
    valid = n >= 5 * k and k >= 20
    if not valid:
        logger.warning("failure_bound(n=%d, k=%d) is outside n >= 5k, k >= 20; not guaranteed", n, k)
    m = n / k
    p = k / n
    if delta <= 0:
        cantelli = 1.0
    else:
        cantelli = min(1.0, 2 * math.pi * k / (delta * delta * 0.99 * n))
    hoeffding = min(1.0, math.exp(-delta * delta * m * 0.99 * (1.0 - p) / (math.pi * k)))
    return FailureBound(cantelli, hoeffding, min(cantelli, hoeffding), valid)


def spare_capacity(n: int, m: int, k: int, slack: float = SPARE_SLACK) -> int:
    """n' = ceil(1.1 E[X])."""
    return math.ceil(slack * expected_spare_exact(n, m, k))


def spare_capacity_worst_case(n: int, k: int, slack: float = SPARE_SLACK) -> int:
    """n' = ceil(1.1 n / sqrt(2 pi k)), the sizing that holds for any alpha <= 1."""
    return math.ceil(slack * n / math.sqrt(2 * math.pi * k))


def fpr_bound(alpha: float, k: int, s: int, eps_spare: float) -> float:
    """alpha*k/s + eps'/sqrt(2 pi k)."""
    return float(alpha) * k / s + eps_spare / math.sqrt(2 * math.pi * k)


def spare_access_bound(n: int, m: int, k: int) -> float:
    """Probability that a query is routed to the spare: min(Pr[Bin(n,1/m) = k+1], 1/sqrt(2 pi k))."""
    cap = 1.0 / math.sqrt(2 * math.pi * k)
    if k + 1 > n:
        return 0.0
    return min(binom_pmf(n, 1.0 / m, k + 1), cap)


def expected_cache_misses_per_negative_query(k: int, spare_blocks: int = 1) -> float:
    """One bin plus spare_blocks for the (at most gamma) fraction routed to the spare."""
    return 1.0 + spare_blocks / math.sqrt(2 * math.pi * k)


def space_bound_bits(params, spare_bits_per_key: float, n_prime: int = None) -> float:
    """Bits per key: 256-bit bins plus spare_bits_per_key for each of n' spare slots."""
    if n_prime is None:
        n_prime = spare_capacity(params.n, params.m, params.k)
    return (params.m * 256 + spare_bits_per_key * n_prime) / params.n


class BoundsResult(NamedTuple):
    expected_spare: float
    spare_capacity: int
    delta: float
    cantelli: float
    hoeffding: float
    failure_bound: float
    t0: float
    t1: float
    fpr_bound: float
    spare_access_bound: float
    valid: bool


def compute_bounds(params, delta: float = 0.1, eps_spare: float = 0.0) -> BoundsResult:
    """Every analytic quantity for one FilterParams instance."""
    n, m, k = params.n, params.m, params.k
    fb = failure_bound(n, k, delta)
    if 0 < k < n:
        env = stirling_envelope(n, k / n, k)
        t0, t1 = env.t0, env.t1
    else:
        t0 = t1 = math.nan
    return BoundsResult(
        expected_spare=expected_spare_exact(n, m, k),
        spare_capacity=spare_capacity(n, m, k),
        delta=delta,
        cantelli=fb.cantelli,
        hoeffding=fb.hoeffding,
        failure_bound=fb.bound,
        t0=t0,
        t1=t1,
        fpr_bound=fpr_bound(params.alpha, k, params.s, eps_spare),
        spare_access_bound=spare_access_bound(n, m, k),
        valid=fb.valid,
    )


# Example Usage (Run this to test)
if __name__ == "__main__":
    n, k = 1 << 22, 25
    for alpha in (1.0, 0.95):
        m = math.ceil(n / (alpha * k))
        print(f"alpha={alpha}: E[X]/n = {expected_spare_exact(n, m, k) / n:.5f}")
    print(f"cap 1/sqrt(2 pi k) = {1 / math.sqrt(2 * math.pi * k):.5f}")
    print(f"failure bound (n=2^25, delta=0.1): {failure_bound(1 << 25, k, 0.1)}")
