import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from batchsaa.errors import DomainError, SolverError
from batchsaa.estimators import evaluate_estimate, full_sample_estimate, partition_batches, subsample_estimate
from batchsaa.problems import L1BoxProblem, PortfolioProblem, SquaredDistanceProblem
from batchsaa.stats import RngStream, sample_gaussian


@given(st.integers(1, 500), st.data())
def test_partition_covers_in_order(nu, data):
    K = data.draw(st.integers(1, nu))
    batches = partition_batches(nu, K)
    assert len(batches) == K
    assert [i for b in batches for i in b] == list(range(nu))
    sizes = [len(b) for b in batches]
    assert max(sizes) - min(sizes) <= 1
    assert sizes == sorted(sizes, reverse=True)
    assert sizes.count(math.ceil(nu / K)) == (nu % K if nu % K else K)


def test_partition_rejects_bad_k():
    with pytest.raises(DomainError):
        partition_batches(5, 6)
    with pytest.raises(DomainError):
        partition_batches(5, 0)


def test_subsample_is_mean_of_batch_solutions():
    p = L1BoxProblem(4, 0.3)
    data = RngStream(0, 0).generator().standard_normal((10, 4))
    est = subsample_estimate(p, data, 3)
    assert est.batch_sizes == [4, 3, 3]
    manual = np.mean([p.saa_solve(data[b.start : b.stop]).x for b in partition_batches(10, 3)], axis=0)
    np.testing.assert_array_equal(est.estimate, manual)


def test_subsample_with_one_batch_equals_full():
    p = L1BoxProblem(4, 0.3)
    data = RngStream(0, 1).generator().standard_normal((10, 4))
    np.testing.assert_array_equal(subsample_estimate(p, data, 1).estimate, full_sample_estimate(p, data).estimate)


def test_subsample_executor_gives_identical_result():
    p = PortfolioProblem(5, 1.0, 0.02, 0.05, 0.0, 1.0)
    data = sample_gaussian(RngStream(0, 2), p.mu, 0.05, 200)
    serial = subsample_estimate(p, data, 5).estimate
    with ThreadPoolExecutor(3) as pool:
        threaded = subsample_estimate(p, data, 5, executor=pool).estimate
    np.testing.assert_array_equal(serial, threaded)


def test_solver_failure_is_raised_not_dropped():
    p = PortfolioProblem(5, 1.0, 0.02, 0.05, -1.0, 2.0, tol=1e-16, max_iter=2)
    data = sample_gaussian(RngStream(0, 3), p.mu, 0.05, 200)
    with pytest.raises(SolverError):
        subsample_estimate(p, data, 5)


def test_evaluate_estimate_relative_fields():
    p = PortfolioProblem(2, 1.0, 0.02, 0.05, 0.0, 1.0)
    x_star, z_star = p.optimum()
    rec = evaluate_estimate(p, x_star)
    assert rec.rel_distance == 0.0 and rec.abs_loss == pytest.approx(0.0, abs=1e-15)
    rec = evaluate_estimate(p, np.zeros(2))
    assert rec.rel_distance == pytest.approx(1.0)
    assert rec.rel_objective_loss == pytest.approx(1.0)


def test_evaluate_estimate_nan_when_optimum_is_zero():
    rec = evaluate_estimate(L1BoxProblem(3, 1.0), np.ones(3))
    assert math.isnan(rec.rel_distance) and math.isnan(rec.rel_objective_loss)
    assert rec.abs_loss == pytest.approx(3.0)


def test_table_instance_full_and_batch():
    p = SquaredDistanceProblem()
    data = np.array([[-3.0], [1.0]])
    assert full_sample_estimate(p, data).estimate[0] == -1.0
    assert subsample_estimate(p, data, 2).estimate[0] == 0.0
