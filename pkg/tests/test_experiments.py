import csv
import json
import math

import numpy as np
import pytest

from batchsaa.errors import ConfigError, DomainError, SolverError
from batchsaa.experiments import (
    REPLICATION_COLUMNS,
    ExperimentConfig,
    Histogram,
    empty_portfolio_report,
    run_asymptotic_experiment,
    run_ball_experiment,
    run_figure_curve,
    run_l1_experiment,
    run_portfolio_experiment,
    run_table1,
    verify_proposition2,
    write_report,
)


def small(**kw):
    base = dict(family="portfolio", n=4, nu=100, K=4, replications=6, root_seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.mark.parametrize(
    "kw, word",
    [
        (dict(replications=0), "replications"),
        (dict(K=200), "K <= nu"),
        (dict(box=(1.0, 0.0)), "lower < upper"),
        (dict(nu=20, K=4), "nu/K > n + 2"),
        (dict(family="other"), "family"),
        (dict(bins=1), "bins"),
    ],
)
def test_config_invariants(kw, word):
    with pytest.raises(ConfigError, match=word.replace("+", r"\+")):
        small(**kw).validate()


def test_histogram_clips_into_end_bins():
    h = Histogram.fixed(-1.0, 1.0, 4).add([-5.0, -1.0, 0.0, 0.99, 1.0, 7.0, float("nan")])
    assert h.counts.tolist() == [2, 0, 1, 3]
    assert h.mass == 6


def test_portfolio_report_and_files(tmp_path):
    report = run_portfolio_experiment(small())
    assert report.columns == REPLICATION_COLUMNS
    s = report.summary
    assert s["wins"] + s["losses"] + s["ties"] == 6
    for hist in report.histograms.values():
        assert hist.mass == 6
    paths = write_report(report, tmp_path)
    names = {p.name for p in paths}
    assert {"replications.csv", "summary.json", "hist_diff_rel_loss.csv"} <= names
    with open(tmp_path / "replications.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == REPLICATION_COLUMNS and len(rows) == 7
    # floats round-trip exactly
    assert float(rows[1][1]) == report.rows[0][1]
    summary = json.loads((tmp_path / "summary.json").read_text())
    for key in ("config", "wins", "losses", "ties", "mean_diff_rel_loss", "mean_diff_rel_dist",
                "mean_weights", "aborted_replications", "seed", "version"):
        assert key in summary
    with open(tmp_path / "hist_diff_rel_dist.csv") as fh:
        assert next(csv.reader(fh)) == ["bin_left", "bin_right", "count"]


def test_aborted_replications_are_counted(monkeypatch):
    from batchsaa import experiments

    real = experiments.full_sample_estimate

    def flaky(problem, samples):
        if samples.stream_index % 2:
            raise SolverError("forced failure")
        return real(problem, samples)

    monkeypatch.setattr(experiments, "full_sample_estimate", flaky)
    report = run_portfolio_experiment(small())
    assert report.summary["aborted_replications"] == 3
    assert [row[0] for row in report.rows] == [0, 2, 4]


def test_empty_report_has_null_means(tmp_path):
    report = empty_portfolio_report(small())
    write_report(report, tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["mean_diff_rel_loss"] is None and summary["wins"] == 0


def test_thread_count_does_not_change_records():
    a = run_portfolio_experiment(small(threads=1))
    b = run_portfolio_experiment(small(threads=3))
    assert a.rows == b.rows


def test_table1_report():
    report = run_table1()
    assert report.summary["loss_full"] == "3/4"
    header, rows = report.tables["table1"]
    assert header == ["xi2\\xi1", "-3", "-1", "1", "3"]
    assert len(rows) == 4


@pytest.mark.parametrize("which", ["fig1", "fig2", "fig3"])
def test_figure_curves(which):
    report = run_figure_curve(which, nu_values=range(10, 40, 10))
    header, rows = report.tables[which]
    assert header[0] == "nu" and len(rows) == 3
    assert all(len(r) == len(header) for r in rows)


def test_figure_log_base_and_unknown():
    ln = run_figure_curve("fig1", n_values=[100], nu_values=[10], log_base="e").tables["fig1"][1][0][1]
    l10 = run_figure_curve("fig1", n_values=[100], nu_values=[10]).tables["fig1"][1][0][1]
    assert ln == pytest.approx(l10 * math.log(10))
    with pytest.raises(DomainError):
        run_figure_curve("fig9")


def test_ball_l1_prop2_asymptotic_run():
    ball = run_ball_experiment(ExperimentConfig(family="ball", n=3, nu=8, K=2, replications=50))
    assert ball.summary["exceedances"]["constrained_sub"] == 0
    l1 = run_l1_experiment(ExperimentConfig(family="l1", n=3, nu=6, K=2, replications=50))
    assert l1.summary["replications"] == 50
    p2 = verify_proposition2(ExperimentConfig(family="l1", n=1, nu=50, K=10, gamma=0.2, replications=200))
    assert len(p2.tables["prop2"][1]) == 3
    asy = run_asymptotic_experiment(small(replications=20))
    assert asy.summary["max_kkt_residual"] <= 1e-9
    assert len(asy.columns) == 1 + 2 * 4
