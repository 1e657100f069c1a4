import ast
import inspect

import numpy as np
import pytest

from prefix_filter.core import oracles
from prefix_filter.core.oracles import (
    ExactMembership,
    MonteCarloConfig,
    NaivePD,
    Route,
    ShadowPrefixFilter,
    balls_into_bins_mc,
    naive_pd_apply,
    shadow_route,
)
from prefix_filter.utils.analysis import expected_spare_exact

EXAMPLE_SET = [(1, 13), (2, 15), (3, 3), (5, 0), (5, 5), (5, 15), (7, 6)]


def test_oracles_share_no_code_with_the_filter():
    tree = ast.parse(inspect.getsource(oracles))
    imported = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom):
            imported.add(node.module or "")
        elif isinstance(node, ast.Import):
            imported.update(alias.name for alias in node.names)
    assert not any(name.startswith("prefix_filter") for name in imported)


def test_naive_pd_example_set():
    model = NaivePD()
    for entry in EXAMPLE_SET:
        assert naive_pd_apply(model, ("insert", entry))
    assert naive_pd_apply(model, ("query", (5, 5)))
    assert not naive_pd_apply(model, ("query", (5, 6)))
    assert not naive_pd_apply(model, ("query", (4, 5)))
    assert naive_pd_apply(model, ("max",)) == (7, 6)
    assert naive_pd_apply(model, ("size",)) == 7


def test_naive_pd_eviction_contract():
    model = NaivePD(k=3, Q=4, R=2)
    for entry in [(0, 1), (2, 3), (3, 0)]:
        model.insert(entry)
    assert not model.insert((1, 1))
    with pytest.raises(ValueError):
        model.evict_max_and_insert((3, 0))
    assert model.evict_max_and_insert((1, 1)) == (3, 0)
    assert model.entries == [(0, 1), (1, 1), (2, 3)]
    assert model.is_overflowed()
    with pytest.raises(ValueError):
        NaivePD(k=3, Q=4, R=2).insert((4, 0))
    with pytest.raises(ValueError):
        naive_pd_apply(model, ("delete", (0, 1)))


def test_shadow_route_examples():
    shadow = ShadowPrefixFilter(k=3)
    assert shadow_route(shadow, (0, 1, 1)) is Route.BIN_ONLY
    for mini in [(0, 5), (1, 1), (2, 2)]:
        assert shadow.insert((0, *mini)) is None
    assert shadow_route(shadow, (0, 9, 9)) is Route.BIN_ONLY
    assert shadow_route(shadow, (0, 9, 9), "insert") is Route.SPARE
    assert shadow.insert((0, 9, 9)) == (0, 9, 9)
    assert shadow_route(shadow, (0, 2, 2)) is Route.BIN_ONLY
    assert shadow_route(shadow, (0, 2, 3)) is Route.SPARE
    assert shadow.insert((0, 0, 1)) == (0, 2, 2)
    assert shadow.stored_prefix(0) == [(0, 1), (0, 5), (1, 1)]
    assert shadow.forwarded == {(0, 9, 9): 1, (0, 2, 2): 1}
    assert shadow.contains((0, 9, 9)) and not shadow.contains((0, 9, 8))
    with pytest.raises(ValueError):
        shadow_route(shadow, (0, 0, 0), "delete")


def test_monte_carlo_two_balls():
    mean, stderr = balls_into_bins_mc(MonteCarloConfig(n=2, m=2, k=1, trials=100_000, seed=1))
    assert abs(mean - 0.25) < 4 * 0.25 / np.sqrt(100_000)
    assert stderr > 0


def test_monte_carlo_is_seeded():
    cfg = MonteCarloConfig(n=5_000, m=200, k=25, trials=5, seed=7)
    assert balls_into_bins_mc(cfg) == balls_into_bins_mc(cfg)


def test_monte_carlo_matches_analysis():
    n, k = 1_000_000, 25
    m = n // k
    mean, _ = balls_into_bins_mc(MonteCarloConfig(n=n, m=m, k=k, trials=50, seed=3))
    assert mean == pytest.approx(expected_spare_exact(n, m, k) / n, rel=0.02)


def test_monte_carlo_fraction_decreases_with_k():
    n = 100_000
    fractions = [balls_into_bins_mc(MonteCarloConfig(n=n, m=n // k, k=k, trials=10, seed=k))[0]
                 for k in (25, 36, 49)]
    assert 0.075 < fractions[0] < 0.084
    assert fractions[0] > fractions[1] > fractions[2]


def test_monte_carlo_config_validation():
    with pytest.raises(ValueError):
        MonteCarloConfig(n=10, m=2, k=1, trials=0)
    with pytest.raises(ValueError):
        MonteCarloConfig(n=10, m=0, k=1)


def test_exact_membership():
    members = ExactMembership([5, 1, 9, 5])
    assert len(members) == 3
    assert 5 in members and 2 not in members
    members.add_many([2, 10])
    assert members.contains_many([1, 2, 3, 10, 11]).tolist() == [True, True, False, True, False]
    assert not ExactMembership().contains_many([1, 2]).any()
