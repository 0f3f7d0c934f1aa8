"""Closed-form error probabilities, the limiting KKT sampler and bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SolverError
from .stats import (
    RandomSource,
    _as_generator,
    chi_square_sf,
    noncentral_f_cdf,
    normal_cdf,
)

# 1/|x - x*|^2 in the ball example equals F/n for a standard noncentral
# F(1, n, lambda) variate F, so P(1/|x - x*|^2 <= t) = F_cdf(n * t).
BALL_F_SCALE_NOTE = "P(|x - x*| >= 1) = noncentral_f_cdf(n, 1, n, nu): standard F at x = n"


def _check_common(n, gamma, nu):
    if n < 1:
        raise DomainError("n must be at least 1")
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if nu < 1:
        raise DomainError("nu must be at least 1")


def _prob_any(p: float, n: int) -> float:
    """``1 - (1 - p)^n`` without cancellation for tiny ``p``."""
    if p >= 1.0:
        return 1.0
    return -math.expm1(n * math.log1p(-p))


def single_sample_error_prob(n: int, gamma: float, nu: int) -> float:
    """P{|x^nu - x*|_inf >= 1} for the L1/box problem with N(0, I) data."""
    _check_common(n, gamma, nu)
    if math.isinf(gamma):
        return 0.0
    return _prob_any(2.0 * normal_cdf(-gamma * math.sqrt(nu)), n)


def batch_error_prob(n: int, gamma: float, nu: int, K: int) -> float:
    """The same event for the mean of ``K`` batch solutions (``nu/K`` samples each)."""
    _check_common(n, gamma, nu)
    if K < 1 or K > nu:
        raise DomainError(f"need 1 <= K <= nu, got K={K}, nu={nu}")
    if math.isinf(gamma):
        return 0.0
    p = 2.0 * normal_cdf(-gamma * math.sqrt(nu / K))
    return _prob_any(p**K, n)


def dominance_check(nu: int, K: int, gamma: float) -> bool:
    """True iff ``(2 Phi(-gamma sqrt(nu/K)))^K < 2 Phi(-gamma sqrt(nu))``.

    Compared in log space so the check stays meaningful when both sides
    underflow.
    """
    if nu < 1 or K < 1 or not gamma > 0:
        raise DomainError("need nu >= 1, K >= 1, gamma > 0")
    lhs = K * math.log(2.0 * normal_cdf(-gamma * math.sqrt(nu / K)))
    rhs = math.log(2.0 * normal_cdf(-gamma * math.sqrt(nu)))
    return lhs < rhs


def ball_error_prob(n: int, nu: int, gamma: float = 1.0) -> float:
    """P{|x^{nu,u} - x*| >= 1} for the unconstrained ball example.

    With centred data ``|x|^2 = Q/(gamma^2 W)`` where ``nW/Q`` is F(1, n, nu),
    so the event is ``F <= n/gamma^2``.
    """
    if n < 1 or nu < 1:
        raise DomainError("need n >= 1 and nu >= 1")
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    return noncentral_f_cdf(float(n) / gamma**2, 1, n, float(nu))


def ball_asymptotic_error_prob(n: int, nu: int) -> float:
    """The same probability under the normal limit: ``P(chi2(n) >= nu)``."""
    if n < 1 or nu < 1:
        raise DomainError("need n >= 1 and nu >= 1")
    return chi_square_sf(float(nu), n)


def asymptotic_gap_curve(n: int, nu_list) -> list[tuple[int, float]]:
    """Finite-sample minus asymptotic error probability for the ball example."""
    return [(int(nu), ball_error_prob(n, int(nu)) - ball_asymptotic_error_prob(n, int(nu))) for nu in nu_list]


def gap_threshold(curve, delta: float):
    """Smallest ``nu`` after which every ``|gap|`` on the curve is ``<= delta``."""
    threshold = None
    for nu, gap in reversed(list(curve)):
        if abs(gap) > delta:
            break
        threshold = nu
    return threshold


# ---------------------------------------------------------------------------
# limiting distribution
# ---------------------------------------------------------------------------


@dataclass
class AsymptoticSpec:
    """Data of the limiting QP ``min u'Hu/2 + c'u`` with ``c ~ N(0, Sigma)``.

    ``A_active`` rows are the constraints active at ``x*``. With
    ``inequality=False`` they are imposed as ``A u = 0`` (the nondegenerate
    case); with ``inequality=True`` as ``A u <= 0`` via an active-set loop.
    A nonzero ``mean_gradient`` adds ``u'mean_gradient = 0`` unless it is
    already implied by the active rows.
    """

    H_star: np.ndarray
    Sigma_star: np.ndarray
    A_active: np.ndarray | None = None
    mean_gradient: np.ndarray | None = None
    inequality: bool = False

    def __post_init__(self):
        self.H_star = np.atleast_2d(np.asarray(self.H_star, dtype=float))
        n = self.H_star.shape[0]
        self.Sigma_star = np.atleast_2d(np.asarray(self.Sigma_star, dtype=float))
        if self.H_star.shape != (n, n) or self.Sigma_star.shape != (n, n):
            raise DomainError("H_star and Sigma_star must be square and of equal size")
        if self.A_active is None:
            self.A_active = np.zeros((0, n))
        self.A_active = np.asarray(self.A_active, dtype=float).reshape(-1, n)
        self.mean_gradient = np.zeros(n) if self.mean_gradient is None else np.asarray(self.mean_gradient, float)
        w = np.linalg.eigvalsh(0.5 * (self.Sigma_star + self.Sigma_star.T))
        if w.size and w.min() < -1e-12 * max(1.0, abs(w.max())):
            raise DomainError("Sigma_star must be positive semidefinite")
        w, V = np.linalg.eigh(0.5 * (self.Sigma_star + self.Sigma_star.T))
        self._sigma_factor = V * np.sqrt(np.clip(w, 0.0, None))

    @property
    def n(self):
        return self.H_star.shape[0]

    def draw_gradient_noise(self, source: RandomSource) -> np.ndarray:
        gen = _as_generator(source)
        return self._sigma_factor @ gen.standard_normal(self.n)


@dataclass
class AsymptoticDraw:
    u: np.ndarray
    pi: np.ndarray
    c: np.ndarray
    kkt_residual: float


def _independent_rows(rows: np.ndarray, tol=1e-10) -> np.ndarray:
    kept = []
    for row in rows:
        trial = np.vstack(kept + [row]) if kept else row[None, :]
        if np.linalg.matrix_rank(trial, tol=tol) == trial.shape[0]:
            kept.append(row)
    return np.vstack(kept) if kept else np.zeros((0, rows.shape[1]))


def solve_kkt(H, c, A):
    """Solve ``[[H, A'], [A, 0]] (u; pi) = (-c; 0)``."""
    n = H.shape[0]
    m = A.shape[0]
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = H
    kkt[:n, n:] = A.T
    kkt[n:, :n] = A
    rhs = np.concatenate([-c, np.zeros(m)])
    if np.linalg.cond(kkt) > 1e12:
        raise SolverError("KKT matrix of the limiting problem is singular")
    sol = np.linalg.solve(kkt, rhs)
    return sol[:n], sol[n:]


def sample_asymptotic_solution(spec: AsymptoticSpec, stream: RandomSource) -> AsymptoticDraw:
    """Draw ``c ~ N(0, Sigma*)`` and solve the limiting QP for ``(u, pi)``."""
    c = spec.draw_gradient_noise(stream)
    return solve_asymptotic_qp(spec, c)


def solve_asymptotic_qp(spec: AsymptoticSpec, c) -> AsymptoticDraw:
    n = spec.n
    c = np.asarray(c, dtype=float)
    A = spec.A_active
    g = spec.mean_gradient
    gnorm = float(np.linalg.norm(g))
    eq_rows = (g / gnorm)[None, :] if gnorm > 0 else np.zeros((0, n))

    if not spec.inequality:
        rows = _independent_rows(np.vstack([A, eq_rows]))
        u, pi = solve_kkt(spec.H_star, c, rows)
        resid = _kkt_residual(spec.H_star, c, rows, u, pi)
        return AsymptoticDraw(u, pi, c, resid)

    # primal-dual active set on A u <= 0 with u'g = 0 always imposed; rows
    # dependent on the equality are satisfied with equality and left out
    working = []
    for i in range(A.shape[0]):
        trial = np.vstack([eq_rows, A[working + [i]]])
        if np.linalg.matrix_rank(trial, tol=1e-10) == trial.shape[0]:
            working.append(i)
    for _ in range(4 * (A.shape[0] + 1)):
        rows = np.vstack([A[working], eq_rows])
        u, pi_all = solve_kkt(spec.H_star, c, rows)
        pi = pi_all[: len(working)]
        if pi.size and pi.min() < -1e-12:
            working.pop(int(np.argmin(pi)))
            continue
        slack = A @ u
        outside = [i for i in range(A.shape[0]) if i not in working and slack[i] > 1e-12]
        if outside:
            working.append(max(outside, key=lambda i: slack[i]))
            working.sort()
            continue
        full_pi = np.zeros(A.shape[0])
        full_pi[working] = pi
        resid = _kkt_residual(spec.H_star, c, A, u, full_pi, eq_rows, pi_all[len(working) :])
        return AsymptoticDraw(u, full_pi, c, resid)
    raise SolverError("active-set loop for the limiting QP did not settle")


def _kkt_residual(H, c, A, u, pi, E=None, mu=None):
    """Stationarity and feasibility violation; ``E`` given means ``A u <= 0`` plus ``E u = 0``."""
    stat = H @ u + c + A.T @ pi
    if E is None:
        prim = np.abs(A @ u)
    else:
        stat = stat + E.T @ mu
        prim = np.concatenate([np.maximum(A @ u, 0.0), np.abs(E @ u)])
    parts = [np.abs(stat).max(initial=0.0), prim.max(initial=0.0)]
    return float(max(parts))


def portfolio_asymptotic_spec(problem, tol=1e-9) -> AsymptoticSpec:
    """Limiting QP data for the plug-in portfolio estimator at ``x*``.

    For Gaussian returns the gradient ``-r + gamma((r - mu)'x)(r - mu)``
    has covariance ``Sigma + gamma^2 (x'Sigma x Sigma + Sigma x x' Sigma)``
    at ``x*``. Bounds active at ``x*`` become rows ``+e_i`` (upper) or
    ``-e_i`` (lower).
    """
    x, _ = problem.optimum()
    S = problem.sigma
    gamma = problem.gamma
    Sx = S @ x
    sigma_star = S + gamma**2 * ((x @ Sx) * S + np.outer(Sx, Sx))
    rows = []
    for i in range(problem.n):
        if x[i] >= problem.upper[i] - tol:
            r = np.zeros(problem.n)
            r[i] = 1.0
            rows.append(r)
        elif x[i] <= problem.lower[i] + tol:
            r = np.zeros(problem.n)
            r[i] = -1.0
            rows.append(r)
    A = np.vstack(rows) if rows else np.zeros((0, problem.n))
    grad = -problem.mu + gamma * Sx
    if np.linalg.norm(grad) <= tol * max(1.0, float(np.linalg.norm(problem.mu))):
        grad = np.zeros(problem.n)
    return AsymptoticSpec(gamma * S, sigma_star, A, grad, inequality=True)


# ---------------------------------------------------------------------------
# losses and bounds
# ---------------------------------------------------------------------------


def loss_approximation(V, H) -> float:
    """Second-order expected loss ``trace(V H)/2`` of an unbiased estimator."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if V.shape != H.shape or V.shape[0] != V.shape[1]:
        raise DomainError(f"V and H must be square of equal size, got {V.shape} and {H.shape}")
    return 0.5 * float(np.trace(V @ H))


@dataclass
class ChebyshevBoundInput:
    bias: float
    M: float
    N: int
    g: float
    K: int
    a: float


def chebyshev_error_bound(inp: ChebyshevBoundInput) -> tuple[float, float]:
    """Threshold and probability of the one-sided Chebyshev tail bound.

    ``P(|u_bar| >= b + a M sqrt((N+1) g (N-g)) / (sqrt(K) N)) <= 1/(a^2 + 1)``.
    """
    if not (0 < inp.g < inp.N):
        raise DomainError(f"need 0 < g < N, got g={inp.g}, N={inp.N}")
    if inp.M <= 0 or inp.K < 1 or inp.a < 0 or inp.bias < 0:
        raise DomainError("need M > 0, K >= 1, a >= 0 and bias >= 0")
    spread = inp.M * math.sqrt((inp.N + 1) * inp.g * (inp.N - inp.g)) / (math.sqrt(inp.K) * inp.N)
    return inp.bias + inp.a * spread, 1.0 / (inp.a**2 + 1.0)


@dataclass
class TailFit:
    alpha: float
    beta: float
    r_squared: float
    n_points: int


def fit_exponential_tail(points, discard_head: float = 0.2) -> TailFit:
    """Least-squares fit of ``log p = log alpha - beta * nu``.

    Nonpositive probabilities are dropped, then the first ``discard_head``
    fraction of the remaining points (pre-asymptotic regime). Pass
    ``discard_head=0`` to keep them. ``r_squared`` is NaN when the
    log-probabilities have no spread.
    """
    pts = sorted((float(nu), float(p)) for nu, p in points if p > 0)
    drop = int(math.floor(discard_head * len(pts))) if discard_head else 0
    pts = pts[drop:]
    if len(pts) < 3:
        raise DomainError("need at least 3 positive points to fit an exponential tail")
    nu = np.array([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(nu, y, 1)
    fitted = intercept + slope * nu
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else math.nan
    beta = -float(slope)
    if ss_tot == 0:
        beta = 0.0
    return TailFit(math.exp(intercept), beta, r2, len(pts))
