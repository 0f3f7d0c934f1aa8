"""Full-sample SAA and batch-mean sub-sample estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SolverError
from .problems import ITERATION_LIMIT
from .stats import SampleSet, as_sample_matrix


@dataclass
class EstimateResult:
    estimate: np.ndarray
    batch_solutions: list = field(default_factory=list)
    K: int = 1
    batch_sizes: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)


@dataclass
class EvaluationRecord:
    rel_distance: float
    rel_objective_loss: float
    abs_loss: float


def partition_batches(nu: int, K: int) -> list[range]:
    """Split ``0..nu-1`` into ``K`` contiguous ranges.

    The first ``nu % K`` batches get ``ceil(nu/K)`` samples, the rest
    ``floor(nu/K)``.
    """
    if K < 1 or K > nu:
        raise DomainError(f"need 1 <= K <= nu, got K={K}, nu={nu}")
    size, extra = divmod(nu, K)
    out = []
    start = 0
    for i in range(K):
        stop = start + size + (1 if i < extra else 0)
        out.append(range(start, stop))
        start = stop
    return out


def _solve(problem, data):
    res = problem.saa_solve(data)
    if res.status == ITERATION_LIMIT:
        raise SolverError(
            f"solver stopped at the iteration limit ({res.iterations} iterations, "
            f"KKT residual {res.kkt_residual:.3e})"
        )
    return res


def full_sample_estimate(problem, samples) -> EstimateResult:
    data = as_sample_matrix(samples)
    if data.shape[0] < 1:
        raise DomainError("need at least one sample")
    res = _solve(problem, data)
    return EstimateResult(res.x, [], 1, [data.shape[0]], [res.status])


def subsample_estimate(problem, samples, K: int, executor=None) -> EstimateResult:
    """Average of the SAA solutions on ``K`` disjoint contiguous batches.

    A solver failure in any batch raises :class:`SolverError`; batches are
    never silently dropped. ``executor`` (anything with an ordered ``map``)
    lets batch solves run concurrently.
    """
    data = as_sample_matrix(samples)
    batches = partition_batches(data.shape[0], K)
    if K == 1:
        return full_sample_estimate(problem, data)
    chunks = [data[b.start : b.stop] for b in batches]
    mapper = executor.map if executor is not None else map
    results = list(mapper(lambda chunk: _solve(problem, chunk), chunks))
    solutions = [r.x for r in results]
    estimate = np.mean(np.stack(solutions), axis=0)
    return EstimateResult(
        estimate,
        solutions,
        K,
        [len(b) for b in batches],
        [r.status for r in results],
    )


def evaluate_estimate(problem, estimate) -> EvaluationRecord:
    """Distance and objective loss of ``estimate`` against the true optimum.

    Relative quantities are NaN when the normalizer (``|x*|`` or ``z*``)
    is zero.
    """
    x = np.atleast_1d(np.asarray(estimate, dtype=float))
    x_star, z_star = problem.optimum()
    value = problem.objective(x)
    abs_loss = value - z_star
    xnorm = float(np.linalg.norm(x_star))
    rel_dist = float(np.linalg.norm(x - x_star)) / xnorm if xnorm > 0 else math.nan
    rel_loss = abs_loss / -z_star if z_star != 0 else math.nan
    return EvaluationRecord(rel_dist, rel_loss, abs_loss)


__all__ = [
    "EstimateResult",
    "EvaluationRecord",
    "SampleSet",
    "evaluate_estimate",
    "full_sample_estimate",
    "partition_batches",
    "subsample_estimate",
]
