"""Full-sample and batch-mean sample average approximation estimators."""

from ._version import __version__
from .analytics import (
    AsymptoticSpec,
    ChebyshevBoundInput,
    asymptotic_gap_curve,
    ball_asymptotic_error_prob,
    ball_error_prob,
    batch_error_prob,
    chebyshev_error_bound,
    dominance_check,
    fit_exponential_tail,
    gap_threshold,
    loss_approximation,
    portfolio_asymptotic_spec,
    sample_asymptotic_solution,
    single_sample_error_prob,
)
from .errors import ConfigError, DomainError, SolverError
from .estimators import (
    EstimateResult,
    EvaluationRecord,
    evaluate_estimate,
    full_sample_estimate,
    partition_batches,
    subsample_estimate,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    run_ball_experiment,
    run_figure_curve,
    run_l1_experiment,
    run_portfolio_experiment,
    run_table1,
    verify_proposition2,
    write_report,
)
from .problems import (
    BallQuadraticProblem,
    L1BoxProblem,
    PortfolioProblem,
    SolveResult,
    SquaredDistanceProblem,
    build_portfolio_qp,
    debias_factor,
    solve_ball_quadratic,
    solve_box_qp,
    solve_l1_box,
)
from .stats import (
    RngStream,
    SampleSet,
    central_f_cdf,
    chi_square_cdf,
    chi_square_sf,
    noncentral_f_cdf,
    normal_cdf,
    normal_cdf_asymptotic,
    sample_gaussian,
    sample_moments,
)
