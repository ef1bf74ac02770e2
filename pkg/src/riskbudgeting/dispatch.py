"""Single entry point routing a solve request to the selected algorithm."""

from __future__ import annotations

from .ccd import solve_ccd
from .errors import InputError
from .jacobi import solve_jacobi
from .model import (
    Algorithm,
    CovarianceModel,
    RiskBudgets,
    RiskMeasureKind,
    RiskMeasureSpec,
    SolveOutcome,
    SolverSettings,
)
from .newton import NewtonConstants, solve_newton


def solve(
    cov: CovarianceModel,
    budgets: RiskBudgets | None = None,
    settings: SolverSettings | None = None,
    measure: RiskMeasureSpec | None = None,
    constants: NewtonConstants | None = None,
) -> SolveOutcome:
    """Solve for risk-budgeting weights with settings.algorithm.

    Budgets default to uniform.  The mean adjusted risk measure is only
    implemented for coordinate descent; requesting it with another
    algorithm is an input error rather than a silent fallback.
    """
    settings = settings if settings is not None else SolverSettings()
    budgets = budgets if budgets is not None else RiskBudgets.uniform(cov.n)
    wants_stddev = measure is not None and measure.kind is RiskMeasureKind.STD_DEV_BASED
    if settings.algorithm is Algorithm.CCD:
        return solve_ccd(cov, budgets, settings, measure)
    if wants_stddev:
        raise InputError(
            "the standard deviation based measure is only supported by the ccd algorithm"
        )
    if settings.algorithm is Algorithm.NEWTON:
        return solve_newton(cov, budgets, settings, constants)
    return solve_jacobi(cov, budgets, settings)
