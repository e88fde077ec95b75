import csv
import io

import numpy as np
import pytest

from cuckoo_stash import cli
from cuckoo_stash.cuckoo_graph import excess
from cuckoo_stash.experiments import (
    CSV_HEADER, ExperimentConfig, ResultRow, histogram_mean, histogram_quantile, loglog_slope,
    random_small_graph, rate_ratio_interval, run, run_failure_prob, run_insertion_cost, run_oracle_suite,
    run_stash_overflow, run_uniformity, uniformity_test, wilson_interval, write_csv,
)


def csv_without_wall(rows):
    return write_csv(rows, wall=False)


# -- statistics helpers ------------------------------------------------------------------------

def test_wilson_interval_known_value():
    lo, hi = wilson_interval(10, 100)
    assert lo == pytest.approx(0.05522, abs=1e-4) and hi == pytest.approx(0.17436, abs=1e-4)
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_loglog_slope_of_a_power_law():
    ns = [2**i for i in range(5, 10)]
    assert loglog_slope(ns, [3.0 / n**2 for n in ns]) == pytest.approx(-2.0)


def test_rate_ratio_interval():
    ratio, lo, hi = rate_ratio_interval(100, 10_000, 100, 10_000)
    assert ratio == 1.0 and lo < 1.0 < hi
    assert hi / ratio == pytest.approx(ratio / lo)
    with pytest.raises(ValueError):
        rate_ratio_interval(0, 10, 3, 10)


def test_histogram_summaries():
    hist = np.array([0, 6, 3, 1])
    assert histogram_mean(hist) == pytest.approx(1.5)
    assert histogram_quantile(hist, 0.5) == 1 and histogram_quantile(hist, 0.99) == 3
    assert histogram_mean(np.zeros(3)) is None


def test_result_row_validation():
    with pytest.raises(ValueError):
        ResultRow("x", 1, 0, "z", 3, 4, 0.5)
    with pytest.raises(ValueError):
        ResultRow("x", 1, 0, "z", 3, 1, 1.5)


def test_config_validation():
    for bad in (dict(trials=-1), dict(source="tab"), dict(engine="gpu"), dict(eps=0), dict(n_list=[0]),
                dict(m=0)):
        with pytest.raises(ValueError):
            ExperimentConfig("failure-prob", **bad)
    assert ExperimentConfig("failure-prob", s=1).lookup_tables == 6


# -- CSV contract ------------------------------------------------------------------------------

def test_csv_header():
    rows = run(ExperimentConfig("failure-prob", n_list=[16], trials=5))
    header = write_csv(rows).splitlines()[0]
    assert header == "experiment,n,s,source,trials,failures,rate,ci_lo,ci_hi,mean_rounds,p99_rounds,wall_ms"
    assert header.split(",") == CSV_HEADER


@pytest.mark.parametrize("experiment", ["failure-prob", "insertion-cost", "stash-overflow"])
def test_csv_is_deterministic_and_thread_independent(experiment):
    cfg = dict(experiment=experiment, n_list=[64, 128], s=1, trials=300, seed=3)
    one = csv_without_wall(run(ExperimentConfig(**cfg, threads=1)))
    again = csv_without_wall(run(ExperimentConfig(**cfg, threads=1)))
    three = csv_without_wall(run(ExperimentConfig(**cfg, threads=3)))
    assert one == again == three
    rows = list(csv.reader(io.StringIO(one)))
    assert all(r[-1] == "" for r in rows[1:])


@pytest.mark.parametrize("experiment", ["failure-prob", "insertion-cost", "stash-overflow"])
@pytest.mark.parametrize("source", ["z", "random"])
def test_jit_and_python_engines_agree(experiment, source):
    cfg = dict(experiment=experiment, n_list=[40], s=0, trials=60, seed=4, source=source)
    fast = csv_without_wall(run(ExperimentConfig(**cfg, engine="jit")))
    slow = csv_without_wall(run(ExperimentConfig(**cfg, engine="python")))
    assert fast == slow


def test_seed_changes_results():
    a = csv_without_wall(run(ExperimentConfig("failure-prob", n_list=[64], m=40, trials=200, seed=1)))
    b = csv_without_wall(run(ExperimentConfig("failure-prob", n_list=[64], m=40, trials=200, seed=2)))
    assert a != b


# -- failure probability -----------------------------------------------------------------------

def test_single_trial_is_reproducible():
    cfg = ExperimentConfig("failure-prob", n_list=[256], trials=1, seed=12)
    (row,) = run_failure_prob(cfg)
    assert row.trials == 1 and row.failures in (0, 1)
    assert csv_without_wall([row]) == csv_without_wall(run_failure_prob(cfg))


def test_s0_failure_rate_is_positive_and_decreasing():
    cfg = ExperimentConfig("failure-prob", n_list=[2**8, 2**10, 2**12], s=0, trials=20_000,
                           source="random", seed=0)
    rates = [row.rate for row in run_failure_prob(cfg)]
    assert all(r > 0 for r in rates)
    assert rates[0] > rates[1] > rates[2]


def test_table_too_small_fails_every_trial():
    # 2m < n nodes cannot carry n edges without a surplus edge somewhere
    (row,) = run_failure_prob(ExperimentConfig("failure-prob", n_list=[100], m=40, trials=50))
    assert row.failures == row.trials and row.rate == 1.0


def test_large_stash_means_no_graph_failure():
    (row,) = run_failure_prob(ExperimentConfig("failure-prob", n_list=[30], s=30, trials=50))
    assert row.failures == 0


# -- insertion cost / stash overflow -----------------------------------------------------------

def test_single_key_takes_one_round():
    (row,) = run_insertion_cost(ExperimentConfig("insertion-cost", n_list=[1], trials=20))
    assert row.mean_rounds == 1.0 and row.p99_rounds == 1.0 and row.failures == 0


def test_mean_rounds_bounded_by_maxloop():
    (row,) = run_insertion_cost(ExperimentConfig("insertion-cost", n_list=[64], eps=0.05, maxloop=6,
                                                 s=64, trials=50, seed=2))
    assert 1.0 <= row.mean_rounds <= 6 and row.p99_rounds <= 6


def test_complete_maxloop_never_stashes_prematurely():
    n = 60
    rows = run_stash_overflow(ExperimentConfig("stash-overflow", n_list=[n], m=40, s=1, maxloop=2 * n + 4,
                                               trials=300, seed=5))
    overflow, premature = rows
    assert premature.experiment == "stash-overflow/premature" and premature.failures == 0
    assert overflow.failures > 0


def test_stash_at_least_excess_never_overflows():
    (overflow, _) = run_stash_overflow(ExperimentConfig("stash-overflow", n_list=[20], s=20, trials=100))
    assert overflow.failures == 0


# -- uniformity --------------------------------------------------------------------------------

def test_single_key_single_bit_uniformity():
    cfg = ExperimentConfig("uniformity", n_list=[16], eps=0.25, w=1, set_size=1, trials=4000, seed=6)
    res = uniformity_test(cfg, 16)
    assert res.counts.sum() == 4000 and res.counts.size == 2
    sigma = (4000 * 0.25) ** 0.5
    assert abs(res.counts[1] - 2000) <= 3 * sigma
    (row,) = run_uniformity(cfg)
    assert row.failures == int(res.rejected) and row.rate == pytest.approx(res.p_value)


def test_uniformity_rejects_oversized_histograms():
    with pytest.raises(ValueError):
        uniformity_test(ExperimentConfig("uniformity", w=8, set_size=4, trials=1), 16)


# -- oracle suite ------------------------------------------------------------------------------

def test_oracle_suite_with_no_instances_passes():
    report = run_oracle_suite(ExperimentConfig("oracle-suite", trials=0))
    assert report.passed and report.instances == 0


def test_oracle_suite_passes_and_covers_the_triple():
    report = run_oracle_suite(ExperimentConfig("oracle-suite", trials=300, seed=1))
    assert report.passed and report.instances == 300
    assert report.checks == {"excess": 300, "feasibility": 900, "complete-insertion": 300}


def test_injected_mismatch_is_reproducible_by_seed():
    def broken(g):
        return excess(g) + (len(g.edges) == 5)

    cfg = ExperimentConfig("oracle-suite", trials=200, seed=2)
    first = run_oracle_suite(cfg, excess_fn=broken)
    again = run_oracle_suite(cfg, excess_fn=broken)
    assert not first.passed
    assert [(m.check, m.seed) for m in first.mismatches] == [(m.check, m.seed) for m in again.mismatches]
    bad = first.mismatches[0]
    assert len(random_small_graph(bad.seed).edges) == 5


# -- CLI ---------------------------------------------------------------------------------------

def test_cli_writes_csv(tmp_path, capsys):
    out = tmp_path / "fp.csv"
    assert cli.main(["failure-prob", "--n-list", "2^5,64", "--trials", "50", "--m", "10",
                     "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [int(r["n"]) for r in rows] == [32, 64]
    assert all(r["failures"] == "50" for r in rows)
    assert "slope" in capsys.readouterr().err


def test_cli_stdout_and_flags(capsys):
    assert cli.main(["insertion-cost", "--n-list", "16", "--trials", "5", "--stash", "1", "--eps", "0.3",
                     "--source", "random", "--threads", "2", "--engine", "python"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split(",") == CSV_HEADER
    assert lines[1].startswith("insertion-cost,16,1,random,5,")


def test_cli_oracle_suite_exit_codes(capsys, monkeypatch):
    assert cli.main(["oracle-suite", "--trials", "50"]) == 0
    assert "PASS" in capsys.readouterr().err
    from cuckoo_stash import experiments

    original = experiments.run_oracle_suite
    monkeypatch.setattr(cli, "run_oracle_suite", lambda cfg: original(cfg, excess_fn=lambda g: excess(g) + 1))
    assert cli.main(["oracle-suite", "--trials", "5", "--seed", "3"]) == 1
    err = capsys.readouterr().err
    assert "MISMATCH excess seed=" in err and "FAIL" in err


def test_cli_rejects_unknown_experiment():
    with pytest.raises(SystemExit):
        cli.main(["bogus"])
