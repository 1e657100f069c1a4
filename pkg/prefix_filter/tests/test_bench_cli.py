import csv
import json
import math

import pytest

from prefix_filter.bench import cli, workloads
from prefix_filter.core.errors import SerializationError, SpareOverflowError, WorkloadError
from prefix_filter.utils.analysis import expected_spare_exact

GAMMA = 1 / math.sqrt(2 * math.pi * 25)


def run_json(tmp_path, *argv):
    out = tmp_path / "report.json"
    assert cli.main([*argv, "--out", str(out), "--format", "json"]) == cli.EXIT_OK
    return json.loads(out.read_text())


def run_csv(tmp_path, *argv):
    out = tmp_path / "rows.csv"
    assert cli.main([*argv, "--out", str(out), "--format", "csv"]) == cli.EXIT_OK
    with open(out, newline="") as f:
        return list(csv.DictReader(f))


def test_pd_stats(tmp_path):
    report = run_json(tmp_path, "pd-stats", "--trials", "200000", "--seed", "1")
    assert report["trials"] == 200_000
    assert report["path_mismatches"] == 0
    assert abs(report["cutoff_fraction"] - report["expected_cutoff_fraction"]) < 0.005
    assert report["cutoff_fraction"] > 0.902 - 0.005
    assert report["cutoff_lower_bound"] == pytest.approx(1 - 25 / 256)
    assert abs(report["single_match_fraction"] - 0.953) < 0.01


@pytest.mark.parametrize("argv", [
    ["pd-stats", "--trials", "0"],
    ["fpr", "--queries", "0"],
    ["fpr", "--alpha", "1.5"],
    ["fpr", "--spare", "cuckoo"],
    ["no-such-command"],
    [],
])
def test_usage_errors_exit_with_1(argv):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(argv)
    assert excinfo.value.code == cli.EXIT_USAGE


def test_invalid_workload_is_a_usage_error(capsys):
    assert cli.main(["load-sweep", "--n", "10", "--rounds", "20"]) == cli.EXIT_USAGE
    assert "rounds" in capsys.readouterr().err


def test_inverted_k_range_is_a_usage_error(capsys):
    assert cli.main(["analysis", "--k-min", "30", "--k-max", "20"]) == cli.EXIT_USAGE
    assert "--k-min" in capsys.readouterr().err


@pytest.mark.parametrize("error", [
    SerializationError(SerializationError.BAD_CHECKSUM, "digest mismatch"),
    ValueError("internal invariant broken"),
])
def test_internal_errors_are_not_usage_errors(monkeypatch, error):
    def broken_fpr(spec, queries):
        raise error

    monkeypatch.setattr(workloads, "run_fpr", broken_fpr)
    with pytest.raises(type(error)):
        cli.main(["fpr", "--n", "100"])


def test_filter_failure_exits_with_2(monkeypatch):
    def failing_fpr(spec, queries):
        raise SpareOverflowError("spare is full")

    monkeypatch.setattr(workloads, "run_fpr", failing_fpr)
    assert cli.main(["fpr", "--n", "100"]) == cli.EXIT_FILTER_FAILURE


def test_fpr_report(tmp_path):
    report = run_json(tmp_path, "fpr", "--n", "16384", "--queries", "131072", "--seed", "5")
    assert report["queries"] == 131_072
    assert report["false_negatives"] == 0
    assert 0.0030 <= report["fpr"] <= 0.0045
    assert report["fpr_bound"] == pytest.approx(0.95 / 256)
    assert report["negative_query_spare_fraction"] <= GAMMA + 0.005
    assert report["touches_per_negative_query"] <= report["touch_bound"]
    assert report["bits_per_key"] <= 12.6


def test_load_sweep_rows(tmp_path):
    n = 20_000
    rows = run_csv(tmp_path, "load-sweep", "--n", str(n), "--rounds", "20", "--queries", "5000", "--seed", "3")
    assert len(rows) == 20
    assert [float(row["load"]) for row in rows] == pytest.approx([i / 20 for i in range(1, 21)])
    assert rows[-1]["inserted"] == str(n)
    assert {row["schema_version"] for row in rows} == {"1"}
    for row in rows:
        for field in ("negative_query_spare_fraction", "positive_query_spare_fraction",
                      "spare_forward_fraction", "empirical_fpr"):
            assert 0.0 <= float(row[field]) <= 1.0
    last = rows[-1]
    assert float(last["negative_query_spare_fraction"]) <= 0.085
    m = math.ceil(n / (0.95 * 25))
    assert float(last["spare_forward_fraction"]) == pytest.approx(expected_spare_exact(n, m, 25) / n, abs=0.01)


def test_build_time_is_deterministic(tmp_path):
    first = run_json(tmp_path, "build-time", "--n", "5000", "--trials", "2", "--seed", "4")
    second = run_json(tmp_path, "build-time", "--n", "5000", "--trials", "2", "--seed", "4")
    assert first["spare_forwards"] == second["spare_forwards"]
    assert first["spare_occupancy"] == second["spare_occupancy"]
    assert first["spare_forwards"][0] == first["spare_forwards"][1]
    assert first["failures"] == 0
    assert first["median_seconds"] > 0

    spec = workloads.WorkloadSpec(5000, 0.95, "bbf", 4)
    pf = workloads.build_filter(spec, workloads.distinct_keys(spec.rng(0), spec.n))
    assert first["bits_per_key"] == pytest.approx(pf.stats()["bits_per_key"])


def test_build_time_vary_seed_counts_failures(tmp_path):
    report = run_json(tmp_path, "build-time", "--n", "20000", "--spare", "exact", "--trials", "3",
                      "--vary-seed", "--seed", "10")
    assert report["vary_seed"]
    assert report["failures"] <= 1
    assert len(report["spare_forwards"]) == 3 - report["failures"]


def test_build_time_vary_seed_many_trials(tmp_path):
    trials = 50
    report = run_json(tmp_path, "build-time", "--n", "2000", "--spare", "exact", "--trials", str(trials),
                      "--vary-seed", "--seed", "100")
    assert report["failures"] <= 1
    assert len(report["spare_forwards"]) == trials - report["failures"]
    assert len(set(report["spare_forwards"])) > 1


def test_analysis_table(capsys):
    assert cli.main(["analysis", "--n", "1000000", "--k-min", "25", "--k-max", "25", "--format", "json"]) == 0
    rows = {row["alpha"]: row for row in json.loads(capsys.readouterr().out)}
    assert set(rows) == {0.5, 0.85, 0.95, 1.0}
    assert rows[1.0]["expected_fraction"] == pytest.approx(0.079, abs=0.002)
    assert rows[1.0]["expected_fraction"] / rows[0.95]["expected_fraction"] == pytest.approx(1.36, abs=0.05)
    assert rows[0.5]["expected_fraction"] < rows[0.85]["expected_fraction"]
    assert rows[1.0]["cap"] == pytest.approx(GAMMA)
    assert abs(rows[0.95]["spare_capacity"] - 1.1 * rows[0.95]["expected_fraction"] * 1_000_000) <= 1


def test_analysis_csv_grid(tmp_path):
    rows = run_csv(tmp_path, "analysis", "--n", "100000", "--k-min", "20", "--k-max", "30", "--k-step", "5",
                   "--alphas", "0.9,1.0")
    assert [(row["k"], row["alpha"]) for row in rows] == [
        ("20", "0.9"), ("20", "1.0"), ("25", "0.9"), ("25", "1.0"), ("30", "0.9"), ("30", "1.0"),
    ]


def test_workload_spec_validation():
    spec = workloads.WorkloadSpec(1000, rounds=20)
    assert spec.queries_per_round == 50
    with pytest.raises(WorkloadError):
        workloads.WorkloadSpec(0)
    with pytest.raises(WorkloadError):
        workloads.WorkloadSpec(10, rounds=11)
