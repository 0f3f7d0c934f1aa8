"""Seeded Monte Carlo experiments and their CSV/JSON reports.

Replication ``r`` always draws from ``RngStream(root_seed, r)``, and records
are gathered by index, so every numeric output is independent of the
number of worker threads.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import _kernels
from ._version import __version__
from .analytics import (
    BALL_F_SCALE_NOTE,
    ChebyshevBoundInput,
    asymptotic_gap_curve,
    ball_asymptotic_error_prob,
    ball_error_prob,
    batch_error_prob,
    chebyshev_error_bound,
    gap_threshold,
    loss_approximation,
    portfolio_asymptotic_spec,
    sample_asymptotic_solution,
    single_sample_error_prob,
)
from .errors import ConfigError, DomainError, SolverError
from .estimators import (
    EvaluationRecord,
    evaluate_estimate,
    full_sample_estimate,
    partition_batches,
    subsample_estimate,
)
from .problems import (
    BallQuadraticProblem,
    L1BoxProblem,
    PortfolioProblem,
    SquaredDistanceProblem,
    debias_factor,
)
from .stats import RngStream, SampleSet, normal_cdf, sample_gaussian

FAMILIES = ("portfolio", "ball", "l1")

# distances within this of the unit threshold count as reaching it, so
# points projected onto the unit sphere are not split by rounding
EXCEED_TOL = 1e-9

REPLICATION_COLUMNS = [
    "rep",
    "full_rel_dist",
    "sub_rel_dist",
    "full_rel_loss",
    "sub_rel_loss",
    "diff_rel_loss",
    "diff_rel_dist",
    "full_mean_weight",
    "sub_mean_weight",
]


@dataclass
class ExperimentConfig:
    family: str = "portfolio"
    n: int = 10
    nu: int = 500
    K: int = 10
    gamma: float = 1.0
    replications: int = 200
    box: tuple = (0.0, 1.0)
    mu: float = 0.02
    sigma: float = 0.05
    root_seed: int = 7
    bins: int = 50
    out: str | None = None
    threads: int = 1
    debias: str = "scale-solution"
    tol: float = 1e-10

    def validate(self) -> "ExperimentConfig":
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.replications < 1:
            raise ConfigError("invariant replications >= 1 violated")
        if self.bins < 2:
            raise ConfigError("invariant bins >= 2 violated")
        if self.n < 1:
            raise ConfigError("invariant n >= 1 violated")
        if not self.gamma > 0:
            raise ConfigError("invariant gamma > 0 violated")
        if not (1 <= self.K <= self.nu):
            raise ConfigError(f"invariant 1 <= K <= nu violated (K={self.K}, nu={self.nu})")
        if self.threads < 1:
            raise ConfigError("invariant threads >= 1 violated")
        if self.family == "portfolio":
            lo, hi = self.box
            if not lo < hi:
                raise ConfigError(f"invariant box lower < upper violated ({lo} >= {hi})")
            if self.debias != "none":
                smallest = self.nu // self.K
                if smallest <= self.n + 2:
                    raise ConfigError(
                        f"invariant nu/K > n + 2 violated: batches of {smallest} samples with n={self.n} "
                        "leave the debiasing factor (nu/K - n - 2)/(nu/K) nonpositive"
                    )
            if self.sigma <= 0:
                raise ConfigError("invariant sigma > 0 violated")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["box"] = list(self.box)
        return d


@dataclass
class ReplicationRecord:
    index: int
    full: EvaluationRecord | None = None
    sub: EvaluationRecord | None = None
    diff_rel_loss: float = math.nan
    diff_rel_dist: float = math.nan
    full_mean_weight: float = math.nan
    sub_mean_weight: float = math.nan
    aborted: str | None = None
    full_x: np.ndarray | None = field(default=None, repr=False)
    sub_x: np.ndarray | None = field(default=None, repr=False)

    def row(self) -> list:
        return [
            self.index,
            self.full.rel_distance,
            self.sub.rel_distance,
            self.full.rel_objective_loss,
            self.sub.rel_objective_loss,
            self.diff_rel_loss,
            self.diff_rel_dist,
            self.full_mean_weight,
            self.sub_mean_weight,
        ]


@dataclass
class Histogram:
    """Counts over fixed, uniform bins; out-of-range values go to the end bins."""

    edges: np.ndarray
    counts: np.ndarray

    @classmethod
    def fixed(cls, lo: float, hi: float, bins: int) -> "Histogram":
        return cls(np.linspace(lo, hi, bins + 1), np.zeros(bins, dtype=np.int64))

    def add(self, values) -> "Histogram":
        values = np.asarray(values, dtype=float)
        values = values[~np.isnan(values)]
        lo, hi = self.edges[0], self.edges[-1]
        bins = self.counts.shape[0]
        idx = np.floor((values - lo) / (hi - lo) * bins).astype(np.int64)
        np.add.at(self.counts, np.clip(idx, 0, bins - 1), 1)
        return self

    @property
    def mass(self) -> int:
        return int(self.counts.sum())

    def rows(self) -> list:
        return [[float(a), float(b), int(c)] for a, b, c in zip(self.edges[:-1], self.edges[1:], self.counts)]


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    summary: dict
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    histograms: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    wall_clock: float = 0.0
    fingerprint: dict = field(default_factory=dict)


def fingerprint() -> dict:
    return {
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "kernel_backend": _kernels.BACKEND,
    }


def _map_replications(fn, reps: int, threads: int) -> list:
    if threads <= 1:
        return [fn(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps)))


def _mean(values):
    values = [v for v in values if not math.isnan(v)]
    return sum(values) / len(values) if values else math.nan


# ---------------------------------------------------------------------------
# two-sample enumeration
# ---------------------------------------------------------------------------


def _fmt_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def run_table1() -> ExperimentReport:
    """Enumerate all 16 two-sample draws of the squared-distance example.

    Solutions, losses and variances are accumulated as exact fractions;
    every solution value is dyadic, so the float solves convert exactly.
    """
    start = time.perf_counter()
    problem = SquaredDistanceProblem()
    support = [Fraction(int(s)) for s in problem.support]
    _, z_star_f = problem.optimum()
    z_star = Fraction(z_star_f)

    cells = {}
    full_vals, sub_vals, full_loss, sub_loss = [], [], [], []
    for xi2 in support:
        for xi1 in support:
            samples = np.array([[float(xi1)], [float(xi2)]])
            xf = full_sample_estimate(problem, samples).estimate[0]
            xs = subsample_estimate(problem, samples, 2).estimate[0]
            ff, fs = Fraction(xf), Fraction(xs)
            cells[(xi2, xi1)] = (ff, fs)
            full_vals.append(ff)
            sub_vals.append(fs)
            full_loss.append(Fraction(problem.objective([xf])) - z_star)
            sub_loss.append(Fraction(problem.objective([xs])) - z_star)

    def mean(vals):
        return sum(vals, Fraction(0)) / len(vals)

    def var(vals):
        m = mean(vals)
        return mean([(v - m) ** 2 for v in vals])

    exact = {
        "z_star": z_star,
        "loss_full": mean(full_loss),
        "loss_sub": mean(sub_loss),
        "var_full": var(full_vals),
        "var_sub": var(sub_vals),
    }
    header = ["xi2\\xi1"] + [_fmt_fraction(s) for s in support]
    rows = []
    for xi2 in support:
        row = [_fmt_fraction(xi2)]
        for xi1 in support:
            a, b = cells[(xi2, xi1)]
            row.append(f"({_fmt_fraction(a)},{_fmt_fraction(b)})")
        rows.append(row)

    summary = {k: _fmt_fraction(v) for k, v in exact.items()}
    summary["float"] = {k: float(v) for k, v in exact.items()}
    summary["loss_approximation"] = {
        "full": loss_approximation(float(exact["var_full"]), 2.0),
        "sub": loss_approximation(float(exact["var_sub"]), 2.0),
    }
    report = ExperimentReport(
        "table1",
        {"support": [float(s) for s in support], "box": [problem.lower, problem.upper], "nu": 2, "K": 2},
        summary,
        tables={"table1": (header, rows)},
        wall_clock=time.perf_counter() - start,
        fingerprint=fingerprint(),
    )
    report.records = [dict(cells=cells, exact=exact)]
    return report


# ---------------------------------------------------------------------------
# error-probability curves
# ---------------------------------------------------------------------------


def _log(p: float, base: str) -> float:
    if p <= 0:
        return -math.inf
    return math.log10(p) if base == "10" else math.log(p)


def run_figure_curve(
    which: str,
    n_values=None,
    gamma: float = 1.0,
    nu_values=None,
    K: int = 10,
    log_base: str = "10",
    delta: float = 1e-3,
) -> ExperimentReport:
    """Curve data for the error-probability figures.

    ``fig1``: log probability of a unit sup-norm error of the full-sample
    solution for each ``n``. ``fig2``: the same for ``K = 1`` and ``K``
    batches. ``fig3``: finite-sample minus asymptotic error probability of
    the unconstrained ball example, with the ``nu`` after which the gap
    stays within ``delta`` reported per ``n``.
    """
    start = time.perf_counter()
    log_base = str(log_base)
    if log_base not in ("10", "e"):
        raise DomainError("log_base must be '10' or 'e'")
    tag = "log10" if log_base == "10" else "ln"
    meta = {"which": which, "gamma": gamma, "log_base": log_base}
    if which == "fig1":
        n_values = list(n_values or (100, 1000, 10000))
        nu_values = list(nu_values or range(10, 61))
        columns = ["nu"] + [f"{tag}_p_n{n}" for n in n_values]
        rows = [[nu] + [_log(single_sample_error_prob(n, gamma, nu), log_base) for n in n_values] for nu in nu_values]
    elif which == "fig2":
        n_values = list(n_values or (10, 100))
        nu_values = list(nu_values or range(10, 46))
        columns = ["nu"]
        for n in n_values:
            columns += [f"{tag}_p_n{n}_K1", f"{tag}_p_n{n}_K{K}"]
        rows = []
        for nu in nu_values:
            row = [nu]
            for n in n_values:
                row.append(_log(single_sample_error_prob(n, gamma, nu), log_base))
                row.append(_log(batch_error_prob(n, gamma, nu, K), log_base))
            rows.append(row)
        meta["K"] = K
    elif which == "fig3":
        n_values = list(n_values or (10, 20, 50))
        nu_values = list(nu_values or range(5, 401, 5))
        curves = {n: asymptotic_gap_curve(n, nu_values) for n in n_values}
        columns = ["nu"] + [f"gap_n{n}" for n in n_values]
        rows = [[nu] + [curves[n][i][1] for n in n_values] for i, nu in enumerate(nu_values)]
        meta["delta"] = delta
        meta["thresholds"] = {str(n): gap_threshold(curves[n], delta) for n in n_values}
        meta["scale_convention"] = BALL_F_SCALE_NOTE
    else:
        raise DomainError(f"unknown figure {which!r}; expected fig1, fig2 or fig3")
    meta["n_values"] = n_values
    return ExperimentReport(
        which,
        {"which": which, "n": n_values, "nu": list(nu_values), "gamma": gamma, "K": K, "log_base": log_base},
        meta,
        tables={which: (columns, rows)},
        wall_clock=time.perf_counter() - start,
        fingerprint=fingerprint(),
    )


# ---------------------------------------------------------------------------
# portfolio
# ---------------------------------------------------------------------------


def portfolio_problem(cfg: ExperimentConfig) -> PortfolioProblem:
    lo, hi = cfg.box
    return PortfolioProblem(
        cfg.n,
        cfg.gamma,
        np.full(cfg.n, cfg.mu),
        cfg.sigma * np.eye(cfg.n),
        np.full(cfg.n, float(lo)),
        np.full(cfg.n, float(hi)),
        debias=cfg.debias,
        tol=cfg.tol,
    )


def _portfolio_replication(problem, cfg, r) -> ReplicationRecord:
    samples = sample_gaussian(RngStream(cfg.root_seed, r), problem.mu, cfg.sigma, cfg.nu)
    try:
        full = full_sample_estimate(problem, samples)
        sub = full if cfg.K == 1 else subsample_estimate(problem, samples, cfg.K)
    except SolverError as exc:
        return ReplicationRecord(r, aborted=str(exc))
    ef = evaluate_estimate(problem, full.estimate)
    es = evaluate_estimate(problem, sub.estimate)
    return ReplicationRecord(
        r,
        ef,
        es,
        es.rel_objective_loss - ef.rel_objective_loss,
        es.rel_distance - ef.rel_distance,
        float(full.estimate.mean()),
        float(sub.estimate.mean()),
        full_x=full.estimate,
        sub_x=sub.estimate,
    )


def summarize_replications(records, cfg: ExperimentConfig) -> tuple[dict, dict]:
    done = [rec for rec in records if rec.aborted is None]
    wins = sum(rec.sub.rel_distance < rec.full.rel_distance for rec in done)
    losses = sum(rec.sub.rel_distance > rec.full.rel_distance for rec in done)
    ties = len(done) - wins - losses
    summary = {
        "config": cfg.to_dict(),
        "wins": wins,
        "losses": losses,
        "ties": ties,
        "completed_replications": len(done),
        "win_fraction": wins / len(done) if done else None,
        "mean_diff_rel_loss": _mean([rec.diff_rel_loss for rec in done]),
        "mean_diff_rel_dist": _mean([rec.diff_rel_dist for rec in done]),
        "mean_rel_dist": {
            "full": _mean([rec.full.rel_distance for rec in done]),
            "sub": _mean([rec.sub.rel_distance for rec in done]),
        },
        "mean_weights": {
            "full": _mean([rec.full_mean_weight for rec in done]),
            "sub": _mean([rec.sub_mean_weight for rec in done]),
        },
        "aborted_replications": len(records) - len(done),
        "seed": cfg.root_seed,
        "version": __version__,
    }
    hists = {
        "diff_rel_loss": Histogram.fixed(-1.0, 1.0, cfg.bins).add([rec.diff_rel_loss for rec in done]),
        "diff_rel_dist": Histogram.fixed(-1.0, 1.0, cfg.bins).add([rec.diff_rel_dist for rec in done]),
        "full_rel_dist": Histogram.fixed(0.0, 2.0, cfg.bins).add([rec.full.rel_distance for rec in done]),
        "sub_rel_dist": Histogram.fixed(0.0, 2.0, cfg.bins).add([rec.sub.rel_distance for rec in done]),
    }
    return summary, hists


def run_portfolio_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Full-sample versus ``K``-batch estimates of the box-constrained portfolio."""
    cfg.validate()
    if cfg.family != "portfolio":
        raise ConfigError("run_portfolio_experiment needs family='portfolio'")
    start = time.perf_counter()
    problem = portfolio_problem(cfg)
    x_star, z_star = problem.optimum()
    records = _map_replications(lambda r: _portfolio_replication(problem, cfg, r), cfg.replications, cfg.threads)
    summary, hists = summarize_replications(records, cfg)
    summary["x_star_mean"] = float(x_star.mean())
    summary["z_star"] = float(z_star)
    return ExperimentReport(
        "portfolio",
        cfg.to_dict(),
        summary,
        columns=list(REPLICATION_COLUMNS),
        rows=[rec.row() for rec in records if rec.aborted is None],
        histograms=hists,
        records=records,
        wall_clock=time.perf_counter() - start,
        fingerprint=fingerprint(),
    )


# ---------------------------------------------------------------------------
# ball
# ---------------------------------------------------------------------------


def _ball_samples(problem, nu, r, seed) -> SampleSet:
    gen = RngStream(seed, r).generator()
    xi = problem.xi_mean + gen.standard_normal((nu, problem.n))
    s2 = problem.sigma2_mean + gen.standard_normal(nu)
    return SampleSet(np.column_stack([xi, s2]), seed, r, "xi ~ N(0, I), sigma2 ~ N(1, 1)")


def run_ball_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Error-norm exceedances ``|x - x*| >= 1`` in the ball-constrained example.

    Three estimators per replication: the unconstrained full-sample
    stationary point, the constrained full-sample solution and the
    constrained ``K``-batch mean.
    """
    cfg.validate()
    start = time.perf_counter()
    problem = BallQuadraticProblem(cfg.n, cfg.gamma)
    x_star, _ = problem.optimum()

    def one(r):
        samples = _ball_samples(problem, cfg.nu, r, cfg.root_seed)
        unc = problem.unconstrained_solution(samples)
        full = full_sample_estimate(problem, samples).estimate
        sub = subsample_estimate(problem, samples, cfg.K).estimate
        return [
            r,
            float(np.linalg.norm(unc - x_star)),
            float(np.linalg.norm(full - x_star)),
            float(np.linalg.norm(sub - x_star)),
        ]

    rows = _map_replications(one, cfg.replications, cfg.threads)
    reps = len(rows)
    counts = {
        "unconstrained_full": sum(row[1] >= 1.0 - EXCEED_TOL for row in rows),
        "constrained_full": sum(row[2] >= 1.0 - EXCEED_TOL for row in rows),
        "constrained_sub": sum(row[3] >= 1.0 - EXCEED_TOL for row in rows),
    }
    predicted = ball_error_prob(cfg.n, cfg.nu, cfg.gamma)
    se = math.sqrt(predicted * (1 - predicted) / reps)
    freq = counts["unconstrained_full"] / reps
    summary = {
        "config": cfg.to_dict(),
        "replications": reps,
        "exceedances": counts,
        "frequencies": {k: v / reps for k, v in counts.items()},
        "predicted_unconstrained": predicted,
        "asymptotic_unconstrained": ball_asymptotic_error_prob(cfg.n, cfg.nu) if cfg.gamma == 1.0 else None,
        "standard_error": se,
        "z_score": (freq - predicted) / se if se > 0 else None,
        "max_sub_dist": max(row[3] for row in rows),
        "scale_convention": BALL_F_SCALE_NOTE,
        "seed": cfg.root_seed,
        "version": __version__,
    }
    return ExperimentReport(
        "ball",
        cfg.to_dict(),
        summary,
        columns=["rep", "full_unc_dist", "full_dist", "sub_dist"],
        rows=rows,
        wall_clock=time.perf_counter() - start,
        fingerprint=fingerprint(),
    )


# ---------------------------------------------------------------------------
# L1 box example and the Chebyshev bound
# ---------------------------------------------------------------------------


@dataclass
class L1Replication:
    index: int
    full_err_inf: float
    sub_err_inf: float
    sub_err_2: float
    weights: np.ndarray  # mean over batches of (max(x_j, 0), max(-x_j, 0)) per coordinate


def _l1_replication(problem, cfg, x_star, r) -> L1Replication:
    gen = RngStream(cfg.root_seed, r).generator()
    samples = problem.xi_mean + gen.standard_normal((cfg.nu, problem.n))
    full = full_sample_estimate(problem, samples)
    sub = full if cfg.K == 1 else subsample_estimate(problem, samples, cfg.K)
    sols = np.stack(sub.batch_solutions) if sub.batch_solutions else full.estimate[None, :]
    err = sols - x_star
    weights = np.concatenate([np.maximum(err, 0.0).mean(axis=0), np.maximum(-err, 0.0).mean(axis=0)])
    u_bar = sub.estimate - x_star
    return L1Replication(
        r,
        float(np.abs(full.estimate - x_star).max()),
        float(np.abs(u_bar).max()),
        float(np.linalg.norm(u_bar)),
        weights,
    )


def run_l1_experiment(cfg: ExperimentConfig, xi_mean=None) -> ExperimentReport:
    """Unit sup-norm error frequencies of the L1/box example with N(xi_mean, I) data."""
    cfg.validate()
    start = time.perf_counter()
    problem = L1BoxProblem(cfg.n, cfg.gamma, xi_mean)
    x_star, _ = problem.optimum()
    reps = _map_replications(lambda r: _l1_replication(problem, cfg, x_star, r), cfg.replications, cfg.threads)
    R = len(reps)
    full_exceed = sum(rep.full_err_inf >= 1.0 for rep in reps)
    sub_exceed = sum(rep.sub_err_inf >= 1.0 for rep in reps)
    summary = {
        "config": cfg.to_dict(),
        "replications": R,
        "full_exceed": full_exceed,
        "sub_exceed": sub_exceed,
        "full_frequency": full_exceed / R,
        "sub_frequency": sub_exceed / R,
        "seed": cfg.root_seed,
        "version": __version__,
    }
    if not np.any(problem.xi_mean):
        p = single_sample_error_prob(cfg.n, cfg.gamma, cfg.nu)
        summary["predicted_full"] = p
        summary["standard_error_full"] = math.sqrt(p * (1 - p) / R)
        if cfg.nu % cfg.K == 0:
            summary["batch_bound"] = batch_error_prob(cfg.n, cfg.gamma, cfg.nu, cfg.K)
    return ExperimentReport(
        "l1",
        cfg.to_dict(),
        summary,
        columns=["rep", "full_err_inf", "sub_err_inf", "sub_err_2"],
        rows=[[rep.index, rep.full_err_inf, rep.sub_err_inf, rep.sub_err_2] for rep in reps],
        records=reps,
        wall_clock=time.perf_counter() - start,
        fingerprint=fingerprint(),
    )


def l1_direction_weight(n: int, gamma: float, batch_size: int, xi_mean=None) -> np.ndarray:
    """Exact ``E[lambda]`` for the signed unit directions ``(+e_j, -e_j)``.

    A batch solution moves along ``+e_j`` when the batch mean exceeds
    ``gamma`` and along ``-e_j`` when it falls below ``-gamma``.
    """
    m = np.zeros(n) if xi_mean is None else np.asarray(xi_mean, dtype=float)
    s = math.sqrt(batch_size)
    up = np.array([normal_cdf((mj - gamma) * s) for mj in m])
    down = np.array([normal_cdf((-mj - gamma) * s) for mj in m])
    return np.concatenate([up, down])


def verify_proposition2(cfg: ExperimentConfig, a_values=(1.0, 2.0, 4.0), bias=None) -> ExperimentReport:
    """Compare the batch-mean error tail with the one-sided Chebyshev bound.

    Directions are the signed unit vectors ``+-e_j`` (``N + 1 = 2n``,
    ``M = 1``); ``g = N * max E[lambda]`` uses the exact Gaussian weights
    of the smallest batch. The bias is zero for centred data.
    """
    cfg.validate()
    start = time.perf_counter()
    base = run_l1_experiment(cfg)
    reps = base.records
    R = len(reps)
    smallest = min(len(b) for b in partition_batches(cfg.nu, cfg.K))
    weights = l1_direction_weight(cfg.n, cfg.gamma, smallest)
    N = 2 * cfg.n - 1
    g = N * float(weights.max())
    b = 0.0 if bias is None else float(bias)
    observed = np.mean([rep.weights for rep in reps], axis=0)
    observed_sd = np.std([rep.weights for rep in reps], axis=0)
    norms = np.array([rep.sub_err_2 for rep in reps])

    rows = []
    for a in a_values:
        threshold, bound = chebyshev_error_bound(ChebyshevBoundInput(b, 1.0, N, g, cfg.K, float(a)))
        exceed = int(np.sum(norms >= threshold))
        freq = exceed / R
        se = math.sqrt(bound * (1 - bound) / R)
        rows.append([float(a), threshold, bound, exceed, freq, se, bool(freq <= bound + 3 * se)])
    summary = {
        "config": cfg.to_dict(),
        "replications": R,
        "N": N,
        "M": 1.0,
        "g": g,
        "bias": b,
        "expected_weight_bound": g / N,
        "observed_max_weight": float(observed.max()),
        "observed_weight_se": float(observed_sd[int(np.argmax(observed))] / math.sqrt(R)),
        "all_hold": all(row[-1] for row in rows),
        "seed": cfg.root_seed,
        "version": __version__,
    }
    return ExperimentReport(
        "prop2",
        cfg.to_dict(),
        summary,
        tables={"prop2": (["a", "threshold", "prob_bound", "exceed", "frequency", "se", "holds"], rows)},
        records=reps,
        wall_clock=time.perf_counter() - start,
        fingerprint=fingerprint(),
    )


# ---------------------------------------------------------------------------
# limiting distribution versus the finite-sample estimator
# ---------------------------------------------------------------------------


def run_asymptotic_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Draws of the limiting error next to scaled errors of the plug-in estimator.

    Each replication yields one draw ``u`` of the limiting QP and one
    realisation ``sqrt(nu) (x_hat - x*)`` of the full-sample portfolio
    estimator.
    """
    cfg.validate()
    start = time.perf_counter()
    problem = portfolio_problem(cfg)
    spec = portfolio_asymptotic_spec(problem)
    x_star, _ = problem.optimum()
    root = math.sqrt(cfg.nu)

    def one(r):
        gen = RngStream(cfg.root_seed, r).generator()
        samples = sample_gaussian(gen, problem.mu, cfg.sigma, cfg.nu)
        est = full_sample_estimate(problem, samples).estimate
        draw = sample_asymptotic_solution(spec, gen)
        return draw, root * (est - x_star)

    out = _map_replications(one, cfg.replications, cfg.threads)
    U = np.array([d.u for d, _ in out])
    E = np.array([e for _, e in out])
    n = cfg.n
    columns = ["rep"] + [f"u_{i}" for i in range(n)] + [f"e_{i}" for i in range(n)]
    rows = [[r] + list(map(float, U[r])) + list(map(float, E[r])) for r in range(len(out))]
    summary = {
        "config": cfg.to_dict(),
        "replications": len(out),
        "active_constraints": int(spec.A_active.shape[0]),
        "trace_cov_limit_draws": float(np.trace(np.atleast_2d(np.cov(U.T, bias=True)))),
        "trace_cov_scaled_errors": float(np.trace(np.atleast_2d(np.cov(E.T, bias=True)))),
        "mean_limit_draws": float(U.mean()),
        "mean_scaled_errors": float(E.mean()),
        "max_kkt_residual": float(max(d.kkt_residual for d, _ in out)),
        "seed": cfg.root_seed,
        "version": __version__,
    }
    if spec.A_active.shape[0] == 0:
        Hinv = np.linalg.inv(spec.H_star)
        summary["trace_cov_theory"] = float(np.trace(Hinv @ spec.Sigma_star @ Hinv))
    return ExperimentReport(
        "asymptotic",
        cfg.to_dict(),
        summary,
        columns=columns,
        rows=rows,
        wall_clock=time.perf_counter() - start,
        fingerprint=fingerprint(),
    )


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, Fraction):
        return _fmt_fraction(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, Fraction):
        return _fmt_fraction(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_report(report: ExperimentReport, directory) -> list[Path]:
    """Write the report's CSV files and ``summary.json`` into ``directory``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if report.columns:
        path = out / "replications.csv"
        _write_csv(path, report.columns, report.rows)
        written.append(path)
    for name, (header, rows) in report.tables.items():
        path = out / f"{name}.csv"
        _write_csv(path, header, rows)
        written.append(path)
    for name, hist in report.histograms.items():
        path = out / f"hist_{name}.csv"
        _write_csv(path, ["bin_left", "bin_right", "count"], hist.rows())
        written.append(path)
    summary = dict(report.summary)
    summary.setdefault("config", report.config)
    summary.setdefault("version", __version__)
    summary["kind"] = report.kind
    summary["wall_clock_s"] = report.wall_clock
    summary["fingerprint"] = report.fingerprint
    path = out / "summary.json"
    with open(path, "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)
    return written


def empty_portfolio_report(cfg: ExperimentConfig) -> ExperimentReport:
    summary, hists = summarize_replications([], cfg)
    return ExperimentReport("portfolio", cfg.to_dict(), summary, list(REPLICATION_COLUMNS), [], hists)


__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "Histogram",
    "ReplicationRecord",
    "debias_factor",
    "empty_portfolio_report",
    "run_asymptotic_experiment",
    "run_ball_experiment",
    "run_figure_curve",
    "run_l1_experiment",
    "run_portfolio_experiment",
    "run_table1",
    "verify_proposition2",
    "write_report",
]
