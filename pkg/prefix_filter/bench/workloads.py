# /prefix_filter/bench/workloads.py
"""
Bench Workloads - desk-scale measurement runs over the prefix filter.
Features: Seeded Key Streams, FPR Report, 5%-Round Load Sweep, Build-Time Medians,
Analysis Tables, PD Cutoff Statistics.

Every random quantity flows from the workload seed, so two runs with the same
arguments agree on everything except the timing fields.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from prefix_filter import BIN_CAPACITY, QUOTIENT_RANGE, REMAINDER_BITS
from prefix_filter.core.errors import SpareOverflowError, WorkloadError
from prefix_filter.core.oracles import ExactMembership
from prefix_filter.core.pocket_dictionary import (
    BODY_OFFSET,
    PDState,
    QueryPath,
    pd_query_path,
    pd_select_query,
)
from prefix_filter.core.prefix_filter import PrefixFilter
from prefix_filter.utils import analysis
from prefix_filter.utils.config import get_config

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
_INSERT_CHUNK = 1 << 16


@dataclass
class WorkloadSpec:
    """
    One bench configuration.
    - n keys inserted over `rounds` rounds whose sizes sum to n.
    - queries_per_round defaults to n / rounds.
    """

    n: int
    alpha: float = 0.95
    spare_kind: str = "bbf"
    seed: int = 0
    rounds: int = 20
    queries_per_round: int = None

    def __post_init__(self):
        if self.n < 1:
            raise WorkloadError(f"n must be positive, got {self.n}")
        if self.rounds < 1 or self.rounds > self.n:
            raise WorkloadError(f"rounds must lie in [1, n], got {self.rounds}")
        if self.queries_per_round is None:
            self.queries_per_round = max(1, self.n // self.rounds)
        if self.queries_per_round < 1:
            raise WorkloadError(f"queries_per_round must be positive, got {self.queries_per_round}")

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])


@dataclass
class MeasurementRow:
    """One load-sweep round; *_per_sec fields are informative only."""

    schema_version: int
    round: int
    load: float
    inserted: int
    insert_ops_per_sec: float
    negative_query_ops_per_sec: float
    positive_query_ops_per_sec: float
    insert_spare_fraction: float
    negative_query_spare_fraction: float
    positive_query_spare_fraction: float
    spare_forward_fraction: float
    bits_per_key: float
    empirical_fpr: float


def random_keys(rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform 64-bit keys."""
    return rng.integers(0, np.iinfo(np.uint64).max, size=count, dtype=np.uint64, endpoint=True)


def distinct_keys(rng: np.random.Generator, count: int) -> np.ndarray:
    """count distinct uniform 64-bit keys in draw order."""
    keys = random_keys(rng, count)
    _, first = np.unique(keys, return_index=True)
    while len(first) < count:
        keys = np.concatenate([keys[np.sort(first)], random_keys(rng, count - len(first))])
        _, first = np.unique(keys, return_index=True)
    return keys[np.sort(first)]


def negative_keys(rng: np.random.Generator, count: int, members: ExactMembership) -> np.ndarray:
    """Uniform keys that are certainly not in members."""
    keys = random_keys(rng, count)
    hit = members.contains_many(keys)
    while hit.any():
        keys[hit] = random_keys(rng, int(hit.sum()))
        hit = members.contains_many(keys)
    return keys


def build_filter(spec: WorkloadSpec, keys: np.ndarray, record_forwards: bool = False) -> PrefixFilter:
    """Fresh filter for spec.n keys with every key of `keys` inserted."""
    pf = PrefixFilter.new(spec.n, spec.alpha, spec.spare_kind, seed=spec.seed, record_forwards=record_forwards)
    for start in range(0, len(keys), _INSERT_CHUNK):
        pf.insert_many(keys[start:start + _INSERT_CHUNK])
    return pf


def _std_error(p: float, count: int) -> float:
    return math.sqrt(p * (1.0 - p) / count) if count else 0.0


def run_fpr(spec: WorkloadSpec, queries: int) -> dict:
    """Build to full load, then measure FPR, space and spare accesses over uniform negatives."""
    if queries < 1:
        raise WorkloadError(f"queries must be positive, got {queries}")
    keys = distinct_keys(spec.rng(0), spec.n)
    pf = build_filter(spec, keys)
    members = ExactMembership(keys)
    negatives = negative_keys(spec.rng(1), queries, members)

    before = pf.counters.snapshot()
    answers = pf.query_many(negatives)
    touched = pf.counters.since(before)

    positives = keys[spec.rng(2).integers(0, spec.n, size=min(queries, spec.n))]
    false_negatives = int((~pf.query_many(positives)).sum())

    stats = pf.stats()
    fpr = float(answers.mean())
    gamma = pf.params.gamma
    return {
        "schema_version": SCHEMA_VERSION,
        "n": spec.n,
        "alpha": spec.alpha,
        "spare": spec.spare_kind,
        "seed": spec.seed,
        "queries": queries,
        "false_positives": int(answers.sum()),
        "fpr": fpr,
        "fpr_std_error": _std_error(fpr, queries),
        "fpr_bound": analysis.fpr_bound(pf.params.alpha, pf.params.k, pf.params.s, 0.0),
        "fpr_bound_worst_spare": analysis.fpr_bound(pf.params.alpha, pf.params.k, pf.params.s, 1.0),
        "false_negatives": false_negatives,
        "bin_table_bits_per_key": stats["bin_table_bits_per_key"],
        "bits_per_key": stats["bits_per_key"],
        "spare_forward_fraction": stats["insert_spare_forwards"] / spec.n,
        "negative_query_spare_fraction": touched.query_spare_accesses / queries,
        "touches_per_negative_query": (touched.bins_touched + touched.spare_blocks_touched) / queries,
        "touch_bound": 1.0 + 2.0 * gamma,
        "spare_access_cap": gamma,
    }


def run_load_sweep(spec: WorkloadSpec) -> list:
    """
    Insert n keys in spec.rounds rounds; each round times inserts, negative queries
    and positive queries (keys sampled from earlier inserts), on pre-generated keys.
    """
    keys = distinct_keys(spec.rng(0), spec.n)
    members = ExactMembership(keys)
    negatives = negative_keys(spec.rng(1), spec.queries_per_round * spec.rounds, members)
    picker = spec.rng(2)
    pf = PrefixFilter.new(spec.n, spec.alpha, spec.spare_kind, seed=spec.seed)
    rows = []
    start = 0
    for i, chunk in enumerate(np.array_split(keys, spec.rounds)):
        neg = negatives[i * spec.queries_per_round:(i + 1) * spec.queries_per_round]
        pos = keys[picker.integers(0, start + len(chunk), size=spec.queries_per_round)]

        c0 = pf.counters.snapshot()
        t0 = time.perf_counter()
        pf.insert_many(chunk)
        t1 = time.perf_counter()
        c1 = pf.counters.snapshot()
        neg_answers = pf.query_many(neg)
        t2 = time.perf_counter()
        c2 = pf.counters.snapshot()
        pf.query_many(pos)
        t3 = time.perf_counter()
        c3 = pf.counters.snapshot()

        start += len(chunk)
        inserts = c1.since(c0)
        negs = c2.since(c1)
        poss = c3.since(c2)
        rows.append(MeasurementRow(
            schema_version=SCHEMA_VERSION,
            round=i + 1,
            load=round(start / spec.n, 6),
            inserted=start,
            insert_ops_per_sec=len(chunk) / max(t1 - t0, 1e-9),
            negative_query_ops_per_sec=len(neg) / max(t2 - t1, 1e-9),
            positive_query_ops_per_sec=len(pos) / max(t3 - t2, 1e-9),
            insert_spare_fraction=inserts.insert_spare_forwards / max(len(chunk), 1),
            negative_query_spare_fraction=negs.query_spare_accesses / len(neg),
            positive_query_spare_fraction=poss.query_spare_accesses / len(pos),
            spare_forward_fraction=pf.counters.insert_spare_forwards / start,
            bits_per_key=pf.space_bits / start,
            empirical_fpr=float(neg_answers.mean()),
        ))
        logger.debug("Round %d/%d: load=%.2f forwards=%d", i + 1, spec.rounds, start / spec.n,
                     pf.counters.insert_spare_forwards)
    return rows


def run_build_time(spec: WorkloadSpec, trials: int, vary_seed: bool = False) -> dict:
    """
    Time `trials` full builds (key generation excluded) and report the median.
    With vary_seed, trial i uses seed + i and spare overflows are counted instead of raised.
    """
    if trials < 1:
        raise WorkloadError(f"trials must be positive, got {trials}")
    durations = []
    failures = 0
    forwards = []
    occupancy = []
    bits_per_key = None
    for i in range(trials):
        trial = WorkloadSpec(spec.n, spec.alpha, spec.spare_kind, spec.seed + i if vary_seed else spec.seed,
                             spec.rounds, spec.queries_per_round)
        keys = distinct_keys(trial.rng(0), trial.n)
        t0 = time.perf_counter()
        try:
            pf = build_filter(trial, keys)
        except SpareOverflowError:
            if not vary_seed:
                raise
            failures += 1
            logger.warning("Build with seed %d failed", trial.seed)
            continue
        durations.append(time.perf_counter() - t0)
        stats = pf.stats()
        forwards.append(stats["insert_spare_forwards"])
        occupancy.append(stats["spare_occupancy"])
        bits_per_key = stats["bits_per_key"]
    return {
        "schema_version": SCHEMA_VERSION,
        "n": spec.n,
        "alpha": spec.alpha,
        "spare": spec.spare_kind,
        "seed": spec.seed,
        "trials": trials,
        "vary_seed": vary_seed,
        "failures": failures,
        "median_seconds": float(np.median(durations)) if durations else None,
        "spare_forwards": forwards,
        "spare_occupancy": occupancy,
        "bits_per_key": bits_per_key,
    }


def run_analysis(k_values, alphas, n: int) -> list:
    """Expected forwarded fraction E[X]/n over a grid of k and alpha, plus cap and n'."""
    rows = []
    for k in k_values:
        cap = 1.0 / math.sqrt(2 * math.pi * k)
        for alpha in alphas:
            m = math.ceil(n / (alpha * k))
            expected = analysis.expected_spare_exact(n, m, k)
            rows.append({
                "schema_version": SCHEMA_VERSION,
                "k": k,
                "alpha": alpha,
                "n": n,
                "m": m,
                "expected_fraction": expected / n,
                "cap": cap,
                "spare_capacity": analysis.spare_capacity(n, m, k),
            })
    return rows


def run_pd_stats(trials: int, seed: int = 0, queries_per_pd: int = 100) -> dict:
    """
    Fill random PDs to capacity and classify `trials` uniform queries by search path.
    single_match_fraction is conditioned on the body containing the remainder.
    """
    if trials < 1:
        raise WorkloadError(f"trials must be positive, got {trials}")
    rng = np.random.default_rng([seed, 3])
    alphabet = 1 << REMAINDER_BITS
    paths = {path: 0 for path in QueryPath}
    mismatches = 0
    expected_cutoff = []
    done = 0
    while done < trials:
        entries = zip(rng.integers(0, QUOTIENT_RANGE, BIN_CAPACITY).tolist(),
                      rng.integers(0, alphabet, BIN_CAPACITY).tolist())
        pd = PDState.from_entries(entries)
        expected_cutoff.append(1.0 - len(set(pd.raw[BODY_OFFSET:])) / alphabet)
        batch = min(queries_per_pd, trials - done)
        for q, r in zip(rng.integers(0, QUOTIENT_RANGE, batch).tolist(),
                        rng.integers(0, alphabet, batch).tolist()):
            answer, path = pd_query_path(pd, (q, r))
            paths[path] += 1
            if answer != pd_select_query(pd, (q, r)):
                mismatches += 1
        done += batch
    matched = trials - paths[QueryPath.CUTOFF]
    return {
        "schema_version": SCHEMA_VERSION,
        "trials": trials,
        "seed": seed,
        "cutoff_fraction": paths[QueryPath.CUTOFF] / trials,
        "expected_cutoff_fraction": float(np.mean(expected_cutoff)),
        "cutoff_lower_bound": 1.0 - BIN_CAPACITY / alphabet,
        "single_match_fraction": paths[QueryPath.SINGLE_MATCH] / matched if matched else None,
        "select_fallback_fraction": paths[QueryPath.SELECT_FALLBACK] / trials,
        "path_mismatches": mismatches,
    }


def default_spec(**overrides) -> WorkloadSpec:
    """WorkloadSpec with n, rounds and spare kind taken from config."""
    values = {
        "n": int(get_config("bench_n")),
        "alpha": float(get_config("max_load_factor")),
        "spare_kind": get_config("spare_kind"),
        "rounds": int(get_config("bench_rounds")),
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    return WorkloadSpec(**values)


def row_dicts(rows) -> list:
    return [asdict(row) if isinstance(row, MeasurementRow) else dict(row) for row in rows]
