import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from batchsaa.errors import DomainError
from batchsaa.problems import (
    DEGENERATE,
    BallQuadraticProblem,
    L1BoxProblem,
    PortfolioProblem,
    SquaredDistanceProblem,
    build_portfolio_qp,
    debias_factor,
    solve_ball_quadratic,
    solve_box_qp,
    solve_l1_box,
    true_objective,
)
from batchsaa.stats import RngStream, sample_gaussian

vec = st.lists(st.floats(-5, 5), min_size=1, max_size=8).map(np.array)


def test_l1_box_closed_form():
    res = solve_l1_box([2.0, -3.0, 0.5, 1.0], 1.0)
    np.testing.assert_array_equal(res.x, [1.0, -1.0, 0.0, 0.0])


@given(vec, st.floats(0.05, 3.0))
def test_l1_box_is_optimal_against_vertices_and_zero(xi, gamma):
    res = solve_l1_box(xi, gamma)
    f = lambda x: -xi @ x + gamma * np.abs(x).sum()
    # separable: each coordinate is optimal among {-1, 0, 1}
    for j in range(xi.shape[0]):
        for v in (-1.0, 0.0, 1.0):
            y = res.x.copy()
            y[j] = v
            assert f(res.x) <= f(y) + 1e-12


def test_l1_box_rejects_bad_gamma():
    with pytest.raises(DomainError):
        solve_l1_box([1.0], 0.0)


def test_ball_quadratic_interior_and_boundary():
    res = solve_ball_quadratic([0.3, 0.4], 1.0, 1.0)
    np.testing.assert_allclose(res.x, [0.3, 0.4])
    res = solve_ball_quadratic([3.0, 4.0], 1.0, 1.0)
    np.testing.assert_allclose(res.x, [0.6, 0.8])


def test_ball_quadratic_concave_and_degenerate():
    res = solve_ball_quadratic([0.0, -2.0], -0.5, 1.0)
    np.testing.assert_allclose(res.x, [0.0, -1.0])
    res = solve_ball_quadratic([0.0, 0.0], -0.5, 1.0)
    assert res.status == DEGENERATE and np.linalg.norm(res.x) == pytest.approx(1.0)


@given(vec, st.floats(-2, 3))
def test_ball_quadratic_feasible_and_no_worse_than_samples(xi, s2):
    res = solve_ball_quadratic(xi, s2, 1.0)
    assert np.linalg.norm(res.x) <= 1 + 1e-12
    f = lambda x: -xi @ x + 0.5 * s2 * x @ x
    gen = np.random.default_rng(0)
    for _ in range(20):
        y = gen.standard_normal(xi.shape[0])
        y /= max(1.0, np.linalg.norm(y))
        assert f(res.x) <= f(y) + 1e-10


def test_debias_factor():
    assert debias_factor(500, 10) == pytest.approx(488 / 500)
    with pytest.raises(DomainError, match="nu - n - 2"):
        debias_factor(12, 10)


def test_build_portfolio_qp_modes():
    data = sample_gaussian(RngStream(0, 0), np.zeros(3), 1.0, 50)
    lin, q_none = build_portfolio_qp(data, 2.0, "none")
    _, q_scale = build_portfolio_qp(data, 2.0, "scale-solution")
    _, q_obj = build_portfolio_qp(data, 2.0, "objective")
    _, q_lit = build_portfolio_qp(data, 2.0, "literal")
    f = debias_factor(50, 3)
    np.testing.assert_allclose(lin, -data.data.mean(axis=0))
    np.testing.assert_allclose(q_scale, q_none)
    np.testing.assert_allclose(q_obj, q_none / f)
    np.testing.assert_allclose(q_lit, q_none * f)
    with pytest.raises(DomainError):
        build_portfolio_qp(data, 2.0, "bogus")


def test_portfolio_scale_solution_equals_shrunk_plugin_in_wide_box():
    p = PortfolioProblem(4, 1.0, 0.02, 0.05, -50.0, 50.0)
    data = sample_gaussian(RngStream(0, 1), p.mu, 0.05, 100).data
    mean = data.mean(axis=0)
    cov = np.cov(data.T, bias=True)
    expected = debias_factor(100, 4) * np.linalg.solve(cov, mean)
    np.testing.assert_allclose(p.saa_solve(data).x, expected, atol=1e-8)


def test_portfolio_optimum_closed_form_and_general():
    p = PortfolioProblem(10, 1.0, 0.02, 0.05, 0.0, 1.0)
    x, z = p.optimum()
    np.testing.assert_allclose(x, 0.4)
    assert z == pytest.approx(-0.04)
    S = np.array([[0.05, 0.01], [0.01, 0.04]])
    q = PortfolioProblem(2, 1.0, [0.02, 0.03], S, -1.0, 1.0)
    xq, _ = q.optimum()
    np.testing.assert_allclose(xq, np.linalg.solve(S, [0.02, 0.03]), atol=1e-10)


def test_portfolio_rejects_bad_box():
    with pytest.raises(DomainError):
        PortfolioProblem(2, 1.0, 0.02, 0.05, 1.0, 1.0)


def test_squared_distance_problem():
    p = SquaredDistanceProblem()
    x, z = p.optimum()
    assert x[0] == 0.0 and z == 5.0
    assert p.objective([1.0]) == 6.0 and p.objective([-1.0]) == 6.0
    assert p.saa_solve(np.array([[3.0], [3.0]])).x[0] == 1.0


def test_true_objective_checks_dimension():
    p = L1BoxProblem(3, 1.0)
    assert true_objective(p, np.zeros(3)) == 0.0
    with pytest.raises(DomainError):
        true_objective(p, np.zeros(2))


def test_l1_objective_is_exact_expectation():
    p = L1BoxProblem(2, 0.5, xi_mean=[1.0, -0.2])
    assert p.objective(np.array([1.0, 0.0])) == pytest.approx(-1.0 + 0.5)
    x, z = p.optimum()
    np.testing.assert_array_equal(x, [1.0, 0.0])


def test_ball_problem_columns():
    p = BallQuadraticProblem(3)
    with pytest.raises(DomainError):
        p.saa_solve(np.zeros((5, 3)))
    data = np.column_stack([np.full((4, 3), 0.1), np.ones(4)])
    np.testing.assert_allclose(p.unconstrained_solution(data), 0.1)


def test_box_qp_one_dimensional():
    res = solve_box_qp([-3.0], [[1.0]], 0.0, 2.0)
    assert res.x[0] == pytest.approx(2.0)
