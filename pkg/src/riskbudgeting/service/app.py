"""HTTP service exposing solve, generate and bench over JSON.

The CLI talks to this app in-process by default; `riskbudget serve` runs
it under uvicorn for remote clients.  Handlers are stateless: every
request carries its full problem data.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..bench import scaling_study, stats_csv, stats_table
from ..bench import plot_csv as render_plot_csv
from ..dispatch import solve
from ..errors import DomainError, InputError, NumericError
from ..io import solve_report
from ..matrixgen import arithmetic_spectrum, correlation_from_spectrum, make_rng
from ..model import (
    Algorithm,
    CorrelationMatrix,
    CovarianceModel,
    RiskBudgets,
    RiskMeasureSpec,
    SolverSettings,
    normalized_risk_contributions,
)
from . import schemas

VALID_ALGORITHMS = ", ".join(a.value for a in Algorithm)


def _covariance_from_request(req: schemas.SolveRequest) -> CovarianceModel:
    matrix = np.asarray(req.matrix, dtype=float)
    if req.matrix_kind == "corr":
        if req.vols is None:
            raise InputError("vols are required when the matrix is a correlation matrix")
        return CovarianceModel(vols=np.asarray(req.vols, dtype=float), corr=CorrelationMatrix(matrix))
    if req.vols is not None:
        raise InputError("vols only apply when the matrix is a correlation matrix")
    return CovarianceModel.from_covariance(matrix)


def _measure_from_request(req: schemas.SolveRequest) -> RiskMeasureSpec | None:
    if req.mu is None and req.c is None:
        return None
    if req.mu is None or req.c is None:
        raise InputError("the mean adjusted measure requires both mu and c")
    return RiskMeasureSpec.std_dev_based(np.asarray(req.mu, dtype=float), req.c)


def create_app() -> FastAPI:
    app = FastAPI(title="riskbudgeting", version=__version__)

    @app.exception_handler(InputError)
    @app.exception_handler(DomainError)
    def bad_input(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(NumericError)
    def numeric_failure(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/solve", response_model=schemas.SolveResponse)
    def solve_endpoint(req: schemas.SolveRequest) -> schemas.SolveResponse:
        cov = _covariance_from_request(req)
        budgets = (
            RiskBudgets(np.asarray(req.budgets, dtype=float))
            if req.budgets is not None
            else RiskBudgets.uniform(cov.n)
        )
        measure = _measure_from_request(req)
        settings = SolverSettings(
            tolerance=req.tolerance, max_cycles=req.max_cycles, algorithm=Algorithm(req.algorithm)
        )
        outcome = solve(cov, budgets, settings, measure)
        if math.isfinite(outcome.final_gap):
            contributions = normalized_risk_contributions(outcome.weights, cov, measure)
        else:
            contributions = np.full(cov.n, math.nan)
        report = solve_report(
            algorithm=settings.algorithm.value,
            converged=outcome.converged,
            cycles=outcome.cycles,
            elapsed_seconds=outcome.elapsed_seconds,
            final_gap=outcome.final_gap,
            weights=outcome.weights.x,
            risk_contributions=contributions,
        )
        # strict JSON cannot carry inf or NaN; those only arise when the
        # measure is nonpositive at the returned weights
        report["final_gap"] = report["final_gap"] if math.isfinite(report["final_gap"]) else None
        report["risk_contributions"] = [
            r if math.isfinite(r) else None for r in report["risk_contributions"]
        ]
        return schemas.SolveResponse(**report)

    @app.post("/generate", response_model=schemas.GenerateResponse)
    def generate_endpoint(req: schemas.GenerateRequest) -> schemas.GenerateResponse:
        spec = arithmetic_spectrum(req.n, req.lam_min)
        corr = correlation_from_spectrum(spec, make_rng(req.seed))
        eigs = np.linalg.eigvalsh(corr.entries)
        return schemas.GenerateResponse(
            n=corr.n,
            matrix=corr.entries.tolist(),
            min_eigenvalue=float(eigs[0]),
            max_eigenvalue=float(eigs[-1]),
            condition_number=float(eigs[-1] / eigs[0]),
        )

    @app.post("/bench", response_model=schemas.BenchResponse)
    def bench_endpoint(req: schemas.BenchRequest) -> schemas.BenchResponse:
        algorithms = []
        for name in req.algorithms:
            try:
                algorithms.append(Algorithm(name))
            except ValueError:
                raise InputError(
                    f"unknown algorithm {name!r}; valid algorithms: {VALID_ALGORITHMS}"
                ) from None
        settings = SolverSettings(tolerance=req.tolerance, max_cycles=req.max_cycles)
        rows = scaling_study(
            sizes=req.sizes,
            trials_per_size=req.trials,
            algorithms=algorithms,
            seed_base=req.seed,
            settings=settings,
            parallel=req.parallel,
        )
        return schemas.BenchResponse(
            stats=[
                schemas.BenchStatsRow(
                    algorithm=row.algorithm.value,
                    n=row.n,
                    trials=row.trials,
                    p_s=row.p_s,
                    t_mean_s=row.t_mean_s,
                    t_mean_cs=row.t_mean_cs,
                    t_max_s=row.t_max_s,
                    t_mean_converged_s=(
                        None if math.isnan(row.t_mean_converged_s) else row.t_mean_converged_s
                    ),
                )
                for row in rows
            ],
            stats_csv=stats_csv(rows),
            plot_csv=render_plot_csv(rows),
            table=stats_table(rows),
        )

    return app


app = create_app()
