"""Risk-budgeting portfolio solvers, matrix generation and benchmarking."""

from .bench import (
    BenchStats,
    TrialRecord,
    aggregate,
    default_trials,
    make_instance,
    plot_csv,
    run_study,
    run_trial,
    scaling_study,
    stats_csv,
    stats_table,
)
from .ccd import (
    CcdState,
    apply_update,
    ccd_update_weight,
    ccd_update_weight_stddev,
    initial_state,
    refresh_state,
    solve_ccd,
)
from .dispatch import solve
from .errors import DomainError, InputError, NumericError, RiskBudgetingError
from .jacobi import betas, jacobi_iterate, solve_jacobi
from .matrixgen import (
    SeededRng,
    SpectrumSpec,
    arithmetic_spectrum,
    correlation_from_spectrum,
    make_rng,
    random_orthogonal,
)
from .model import (
    Algorithm,
    CorrelationMatrix,
    CovarianceModel,
    RiskBudgets,
    RiskMeasureKind,
    RiskMeasureSpec,
    SolveOutcome,
    SolverSettings,
    Weights,
    convergence_gap,
    normalize,
    normalized_risk_contributions,
    portfolio_volatility,
    rescale_by_vol,
    sqp_residual,
)
from .newton import (
    DecrementKind,
    NewtonConstants,
    NewtonState,
    Phase,
    gradient,
    hessian,
    initial_point,
    newton_direction,
    newton_iterate,
    objective,
    proxy_decrement,
    solve_newton,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "BenchStats",
    "CcdState",
    "CorrelationMatrix",
    "CovarianceModel",
    "DecrementKind",
    "DomainError",
    "InputError",
    "NewtonConstants",
    "NewtonState",
    "NumericError",
    "Phase",
    "RiskBudgetingError",
    "RiskBudgets",
    "RiskMeasureKind",
    "RiskMeasureSpec",
    "SeededRng",
    "SolveOutcome",
    "SolverSettings",
    "SpectrumSpec",
    "TrialRecord",
    "Weights",
    "aggregate",
    "apply_update",
    "arithmetic_spectrum",
    "betas",
    "ccd_update_weight",
    "ccd_update_weight_stddev",
    "convergence_gap",
    "correlation_from_spectrum",
    "default_trials",
    "gradient",
    "hessian",
    "initial_point",
    "initial_state",
    "jacobi_iterate",
    "make_instance",
    "make_rng",
    "newton_direction",
    "newton_iterate",
    "normalize",
    "normalized_risk_contributions",
    "objective",
    "plot_csv",
    "portfolio_volatility",
    "proxy_decrement",
    "random_orthogonal",
    "refresh_state",
    "rescale_by_vol",
    "run_study",
    "run_trial",
    "scaling_study",
    "solve",
    "solve_ccd",
    "solve_jacobi",
    "solve_newton",
    "sqp_residual",
    "stats_csv",
    "stats_table",
]
