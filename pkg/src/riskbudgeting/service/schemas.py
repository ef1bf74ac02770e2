"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

AlgorithmName = Literal["ccd", "newton", "jacobi"]


class SolveRequest(BaseModel):
    matrix: list[list[float]]
    matrix_kind: Literal["corr", "cov"]
    vols: list[float] | None = None
    budgets: list[float] | None = None
    algorithm: AlgorithmName = "ccd"
    mu: list[float] | None = None
    c: float | None = None
    tolerance: float = Field(default=1e-8, gt=0.0)
    max_cycles: int = Field(default=10000, ge=1)


class SolveResponse(BaseModel):
    """Solve report; final_gap and risk_contributions are null when the
    mean adjusted measure is nonpositive at the returned weights (JSON
    cannot carry the non-finite values that case produces)."""

    algorithm: str
    converged: bool
    cycles: int
    elapsed_seconds: float
    final_gap: float | None
    weights: list[float]
    risk_contributions: list[float | None]


class GenerateRequest(BaseModel):
    n: int
    seed: int = Field(default=0, ge=0)
    lam_min: float | None = None


class GenerateResponse(BaseModel):
    n: int
    matrix: list[list[float]]
    min_eigenvalue: float
    max_eigenvalue: float
    condition_number: float


class BenchRequest(BaseModel):
    sizes: list[int]
    trials: int | None = None
    algorithms: list[str] = ["ccd", "newton"]
    seed: int = Field(default=0, ge=0)
    tolerance: float = Field(default=1e-8, gt=0.0)
    max_cycles: int = Field(default=10000, ge=1)
    parallel: bool = True


class BenchStatsRow(BaseModel):
    algorithm: str
    n: int
    trials: int
    p_s: float
    t_mean_s: float
    t_mean_cs: float
    t_max_s: float
    t_mean_converged_s: float | None


class BenchResponse(BaseModel):
    stats: list[BenchStatsRow]
    stats_csv: str
    plot_csv: str
    table: str


class HealthResponse(BaseModel):
    status: str
    version: str
