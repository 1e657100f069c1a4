# /prefix_filter/tests/test_example.py
"""
Tests for Prefix Filter Examples
Features: Smoke test for the quickstart walk-through.
"""

from prefix_filter.examples.quickstart_example import run_quickstart


def test_quickstart(capsys):
    """Quickstart runs end to end and reports sane numbers."""
    result = run_quickstart(n=20_000, seed=3)
    assert result["false_negatives"] == 0
    assert result["round_trip_identical"]
    assert 0.0 < result["fpr"] < 0.01
    assert result["bits_per_key"] < 13.0
    assert result["expected_spare"] > 0

    out = capsys.readouterr().out
    assert "Prefix Filter Quickstart" in out
    assert "False negatives: 0" in out
