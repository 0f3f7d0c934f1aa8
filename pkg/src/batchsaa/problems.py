"""Mean-risk problem families, their SAA solvers and the box QP solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError
from .stats import as_sample_matrix, sample_moments

CONVERGED = "converged"
ITERATION_LIMIT = "iteration-limit"
DEGENERATE = "degenerate"

DEBIAS_MODES = ("scale-solution", "objective", "literal", "none")


@dataclass
class SolveResult:
    x: np.ndarray
    in_sample_value: float
    iterations: int
    kkt_residual: float
    status: str


def _vector(v, name="vector"):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    return v


def _check_gamma(gamma):
    if not gamma > 0:
        raise DomainError(f"risk aversion gamma must be positive, got {gamma}")


# ---------------------------------------------------------------------------
# closed-form solvers
# ---------------------------------------------------------------------------


def solve_l1_box(xi_bar, gamma: float) -> SolveResult:
    """Minimize ``-xi_bar'x + gamma*|x|_1`` over ``[-1, 1]^n``.

    The problem separates by coordinate: ``x_j = sign(xi_bar_j)`` when
    ``|xi_bar_j| > gamma`` and 0 otherwise (ties resolve to 0).
    """
    _check_gamma(gamma)
    xi_bar = _vector(xi_bar, "xi_bar")
    x = np.where(np.abs(xi_bar) > gamma, np.sign(xi_bar), 0.0)
    value = float(-xi_bar @ x + gamma * np.abs(x).sum())
    return SolveResult(x, value, 0, 0.0, CONVERGED)


def solve_ball_quadratic(xi_bar, sigma2_bar: float, gamma: float) -> SolveResult:
    """Minimize ``-xi_bar'x + (gamma/2)*sigma2_bar*|x|^2`` over the unit ball.

    A nonpositive ``sigma2_bar`` makes the objective concave; its minimum
    then sits on the sphere in the direction of ``xi_bar``.
    """
    _check_gamma(gamma)
    xi_bar = _vector(xi_bar, "xi_bar")
    curvature = gamma * float(sigma2_bar)
    norm = float(np.linalg.norm(xi_bar))
    status = CONVERGED
    if curvature > 0:
        x = xi_bar / curvature
        xnorm = norm / curvature
        if xnorm > 1.0:
            x = xi_bar / norm
    elif norm > 0:
        x = xi_bar / norm
    else:
        # every boundary point is optimal
        x = np.zeros_like(xi_bar)
        x[0] = 1.0
        status = DEGENERATE
    value = float(-xi_bar @ x + 0.5 * curvature * (x @ x))
    return SolveResult(x, value, 0, 0.0, status)


def solve_box_qp(
    linear,
    quadratic,
    lower,
    upper,
    tol: float = 1e-10,
    max_iter: int = 50000,
    x0=None,
    power_iters: int = 50,
) -> SolveResult:
    """Minimize ``linear'x + x'Qx/2`` over ``lower <= x <= upper``.

    Accelerated projected gradient with step ``1/L``; ``L`` comes from
    power iteration on ``Q``. Stops when the KKT residual
    ``max|x - clip(x - grad)|`` drops to ``tol``. Starts at the box
    midpoint unless ``x0`` is given.
    """
    c = _vector(linear, "linear")
    n = c.shape[0]
    Q = np.asarray(quadratic, dtype=float)
    if Q.ndim == 0:
        Q = Q.reshape(1, 1)
    lo = np.broadcast_to(np.asarray(lower, dtype=float), (n,)).copy()
    hi = np.broadcast_to(np.asarray(upper, dtype=float), (n,)).copy()
    if Q.shape != (n, n):
        raise DomainError(f"quadratic term must be {n}x{n}, got {Q.shape}")
    if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo >= hi):
        raise DomainError("box bounds must satisfy lower < upper componentwise")
    scale = max(1.0, float(np.abs(Q).max()) if Q.size else 1.0)
    if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12 * scale):
        raise DomainError("quadratic term must be symmetric")
    Q = np.ascontiguousarray(0.5 * (Q + Q.T))
    if n and np.linalg.eigvalsh(Q).min() < -1e-10 * scale:
        raise DomainError("quadratic term is indefinite beyond tolerance")

    if x0 is None:
        if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
            x0 = 0.5 * (lo + hi)
        else:
            x0 = np.clip(np.zeros(n), lo, hi)
    x0 = np.ascontiguousarray(_vector(x0, "x0"))

    top = _kernels.power_iteration(Q, power_iters)
    lipschitz = max(1.01 * top, 1e-300)
    x, iters, res = _kernels.box_qp(Q, np.ascontiguousarray(c), lo, hi, x0, lipschitz, tol, max_iter)
    x = np.asarray(x)
    value = float(c @ x + 0.5 * x @ Q @ x)
    status = CONVERGED if res <= tol else ITERATION_LIMIT
    return SolveResult(x, value, int(iters), float(res), status)


# ---------------------------------------------------------------------------
# portfolio plumbing
# ---------------------------------------------------------------------------


def debias_factor(nu: int, n: int) -> float:
    """The unbiasing factor ``(nu - n - 2)/nu`` for ``nu`` observations of ``n`` assets."""
    if nu <= n + 2:
        raise DomainError(
            f"debiasing factor (nu - n - 2)/nu needs nu > n + 2 observations per solve; got nu={nu}, n={n}"
        )
    return (nu - n - 2) / nu


def _debias_mode(debias) -> str:
    if debias is True:
        return "scale-solution"
    if debias is False or debias is None:
        return "none"
    if debias not in DEBIAS_MODES:
        raise DomainError(f"unknown debias mode {debias!r}; expected one of {DEBIAS_MODES}")
    return debias


def build_portfolio_qp(samples, gamma: float, debias="scale-solution"):
    """Plug-in QP data ``(linear, quadratic)`` for one batch of returns.

    ``linear = -r_hat``. The quadratic term is ``gamma * Sigma_hat`` for the
    ``scale-solution`` and ``none`` modes; ``objective`` divides it by the
    debiasing factor and ``literal`` multiplies it by the factor.
    ``scale-solution`` leaves the factor to be applied to the solution
    (see :meth:`PortfolioProblem.saa_solve`).
    """
    _check_gamma(gamma)
    mode = _debias_mode(debias)
    data = as_sample_matrix(samples)
    nu, n = data.shape
    moments = sample_moments(data)
    quadratic = gamma * moments.covariance
    if mode != "none":
        factor = debias_factor(nu, n)
        if mode == "objective":
            quadratic = quadratic / factor
        elif mode == "literal":
            quadratic = quadratic * factor
    return -moments.mean, quadratic


# ---------------------------------------------------------------------------
# problem families
# ---------------------------------------------------------------------------


@dataclass
class L1BoxProblem:
    """``min E[-xi'x + gamma*|x|_1]`` over ``[-1,1]^n`` with ``xi ~ N(xi_mean, I)``."""

    n: int
    gamma: float = 1.0
    xi_mean: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("dimension n must be at least 1")
        _check_gamma(self.gamma)
        self.xi_mean = np.zeros(self.n) if self.xi_mean is None else _vector(self.xi_mean)
        if self.xi_mean.shape != (self.n,):
            raise DomainError("xi_mean length must equal n")

    @property
    def dim(self):
        return self.n

    def saa_solve(self, samples) -> SolveResult:
        data = as_sample_matrix(samples)
        return solve_l1_box(data.mean(axis=0), self.gamma)

    def objective(self, x) -> float:
        return float(-self.xi_mean @ x + self.gamma * np.abs(x).sum())

    def optimum(self):
        x = solve_l1_box(self.xi_mean, self.gamma).x
        return x, self.objective(x)

    def is_feasible(self, x, tol=1e-12):
        return bool(np.all(np.abs(x) <= 1.0 + tol))


@dataclass
class BallQuadraticProblem:
    """``min E[-xi'x + (gamma/2) sigma2 |x|^2]`` over the unit ball.

    Sample rows are ``(xi_1..xi_n, sigma2)``: ``n + 1`` columns, the last
    one an unbiased observation of the risk parameter.
    """

    n: int
    gamma: float = 1.0
    xi_mean: np.ndarray | None = None
    sigma2_mean: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("dimension n must be at least 1")
        _check_gamma(self.gamma)
        self.xi_mean = np.zeros(self.n) if self.xi_mean is None else _vector(self.xi_mean)

    @property
    def dim(self):
        return self.n

    def _split(self, samples):
        data = as_sample_matrix(samples)
        if data.shape[1] != self.n + 1:
            raise DomainError(f"ball samples need n + 1 = {self.n + 1} columns, got {data.shape[1]}")
        return data[:, : self.n].mean(axis=0), float(data[:, self.n].mean())

    def saa_solve(self, samples) -> SolveResult:
        xi_bar, s2 = self._split(samples)
        return solve_ball_quadratic(xi_bar, s2, self.gamma)

    def unconstrained_solution(self, samples) -> np.ndarray:
        """Stationary point ``xi_bar/(gamma*sigma2_bar)`` without the ball constraint."""
        xi_bar, s2 = self._split(samples)
        return xi_bar / (self.gamma * s2)

    def objective(self, x) -> float:
        return float(-self.xi_mean @ x + 0.5 * self.gamma * self.sigma2_mean * (x @ x))

    def optimum(self):
        x = solve_ball_quadratic(self.xi_mean, self.sigma2_mean, self.gamma).x
        return x, self.objective(x)

    def is_feasible(self, x, tol=1e-12):
        return bool(np.linalg.norm(x) <= 1.0 + tol)


@dataclass
class PortfolioProblem:
    """Mean-variance portfolio ``min -mu'x + (gamma/2) x'Sigma x`` over a box."""

    n: int
    gamma: float
    mu: np.ndarray
    sigma: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    debias: str = "scale-solution"
    tol: float = 1e-10
    max_iter: int = 50000

    def __post_init__(self):
        _check_gamma(self.gamma)
        n = self.n
        self.mu = np.broadcast_to(np.asarray(self.mu, dtype=float), (n,)).copy()
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim == 0:
            sigma = sigma * np.eye(n)
        elif sigma.ndim == 1:
            sigma = np.diag(sigma)
        if sigma.shape != (n, n):
            raise DomainError("sigma must be n x n")
        if not np.allclose(sigma, sigma.T) or np.linalg.eigvalsh(sigma).min() < -1e-12:
            raise DomainError("sigma must be symmetric positive semidefinite")
        self.sigma = sigma
        self.lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        self.upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        if np.any(self.lower >= self.upper):
            raise DomainError("box bounds must satisfy lower < upper componentwise")
        self.debias = _debias_mode(self.debias)

    @property
    def dim(self):
        return self.n

    def saa_solve(self, samples) -> SolveResult:
        data = as_sample_matrix(samples)
        linear, quadratic = build_portfolio_qp(data, self.gamma, self.debias)
        res = solve_box_qp(linear, quadratic, self.lower, self.upper, self.tol, self.max_iter)
        if self.debias == "scale-solution":
            factor = debias_factor(data.shape[0], self.n)
            # shrinking toward 0 stays in the box when the box contains 0
            x = np.clip(factor * res.x, self.lower, self.upper)
            value = float(linear @ x + 0.5 * x @ quadratic @ x)
            res = SolveResult(x, value, res.iterations, res.kkt_residual, res.status)
        return res

    def objective(self, x) -> float:
        return float(-self.mu @ x + 0.5 * self.gamma * x @ self.sigma @ x)

    def optimum(self):
        off = self.sigma - np.diag(np.diag(self.sigma))
        d = np.diag(self.sigma)
        if not off.any() and np.all(d > 0):
            x = np.clip(self.mu / (self.gamma * d), self.lower, self.upper)
        else:
            x = solve_box_qp(-self.mu, self.gamma * self.sigma, self.lower, self.upper, tol=1e-13).x
        return x, self.objective(x)

    def is_feasible(self, x, tol=1e-12):
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


@dataclass
class SquaredDistanceProblem:
    """``min E[(x - xi)^2]`` over ``[lower, upper]`` with ``xi`` uniform on ``support``.

    With support ``{-3, -1, 1, 3}`` and ``[-1, 1]`` this is the two-sample
    example whose solutions are enumerated by :func:`run_table1`.
    """

    support: tuple = (-3.0, -1.0, 1.0, 3.0)
    lower: float = -1.0
    upper: float = 1.0

    @property
    def dim(self):
        return 1

    def saa_solve(self, samples) -> SolveResult:
        data = as_sample_matrix(samples)
        x = np.clip(data.mean(axis=0), self.lower, self.upper)
        value = float(np.mean((x - data) ** 2))
        return SolveResult(x, value, 0, 0.0, CONVERGED)

    def objective(self, x) -> float:
        s = np.asarray(self.support, dtype=float)
        x = float(np.asarray(x).reshape(-1)[0])
        return float(np.mean((x - s) ** 2))

    def optimum(self):
        x = np.array([float(np.clip(np.mean(self.support), self.lower, self.upper))])
        return x, self.objective(x)

    def is_feasible(self, x, tol=1e-12):
        x = np.asarray(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


def true_objective(problem, x) -> float:
    """Exact expected objective of ``x`` under the problem's true model."""
    x = _vector(x, "x")
    if x.shape[0] != problem.dim:
        raise DomainError(f"x has dimension {x.shape[0]}, problem has {problem.dim}")
    return problem.objective(x)
