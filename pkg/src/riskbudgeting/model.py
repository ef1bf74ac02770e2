"""Domain types and risk computations shared by every solver.

All types are immutable after construction (frozen dataclasses holding
read-only numpy arrays) and all operations are pure functions, so anything
in this module is safe to use concurrently without locking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, InputError

SYMMETRY_TOL = 1e-12
UNIT_DIAG_TOL = 1e-12
BUDGET_SUM_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-12


class Algorithm(str, Enum):
    """Solver selector used by settings, the benchmark harness and the CLI."""

    CCD = "ccd"
    NEWTON = "newton"
    JACOBI = "jacobi"


class RiskMeasureKind(str, Enum):
    VOLATILITY = "volatility"
    STD_DEV_BASED = "stddev"


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains nonfinite entries")
    return arr


def _require_length(arr: np.ndarray, n: int, name: str) -> None:
    if arr.shape[0] != n:
        raise InputError(f"{name} has length {arr.shape[0]}, expected {n}")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def first_nonpositive_pivot(matrix: np.ndarray) -> int:
    """Index of the first failing Cholesky pivot of a symmetric matrix.

    Returns -1 when the factorization succeeds.  Only used on the error
    path to produce a precise message; the fast path goes through LAPACK.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    for k in range(n):
        pivot = a[k, k]
        if not np.isfinite(pivot) or pivot <= 0.0:
            return k
        root = math.sqrt(pivot)
        a[k, k:] /= root
        a[k + 1 :, k + 1 :] -= np.outer(a[k, k + 1 :], a[k, k + 1 :])
    return -1


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric positive definite matrix with unit diagonal.

    Validation happens once here (including the Cholesky positive
    definiteness check); solvers assume a valid matrix afterwards.
    Asymmetries up to 1e-12 in the input are averaged away so the stored
    matrix is exactly symmetric.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError(f"correlation matrix must be square, got shape {arr.shape}")
        if arr.shape[0] == 0:
            raise InputError("correlation matrix must have at least one row")
        if not np.all(np.isfinite(arr)):
            raise InputError("correlation matrix contains nonfinite entries")
        skew = np.abs(arr - arr.T).max()
        if skew > SYMMETRY_TOL:
            raise InputError(f"correlation matrix is not symmetric (max asymmetry {skew:.3e})")
        arr = (arr + arr.T) / 2.0
        diag_err = np.abs(np.diag(arr) - 1.0).max()
        if diag_err > UNIT_DIAG_TOL:
            k = int(np.abs(np.diag(arr) - 1.0).argmax())
            raise InputError(f"correlation matrix diagonal entry {k} is {arr[k, k]!r}, expected 1")
        try:
            np.linalg.cholesky(arr)
        except np.linalg.LinAlgError:
            k = first_nonpositive_pivot(arr)
            raise InputError(
                f"matrix is not positive definite: Cholesky pivot {k} is nonpositive"
            ) from None
        object.__setattr__(self, "entries", _readonly(np.ascontiguousarray(arr)))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "CorrelationMatrix":
        return cls(np.eye(n))


@dataclass(frozen=True)
class CovarianceModel:
    """Per-asset volatilities plus a correlation matrix.

    The implied covariance ``matrix[i, j] = vols[i] * corr[i, j] * vols[j]``
    is precomputed once; it inherits symmetry and positive definiteness
    from the validated correlation matrix.
    """

    vols: np.ndarray
    corr: CorrelationMatrix
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        vols = _as_vector(self.vols, "vols")
        _require_length(vols, self.corr.n, "vols")
        if np.any(vols <= 0.0):
            k = int(np.argmax(vols <= 0.0))
            raise InputError(f"vols[{k}] = {vols[k]!r} is not strictly positive")
        sigma = np.outer(vols, vols) * self.corr.entries
        object.__setattr__(self, "vols", _readonly(vols))
        object.__setattr__(self, "matrix", _readonly(np.ascontiguousarray(sigma)))

    @property
    def n(self) -> int:
        return self.corr.n

    @classmethod
    def from_correlation(cls, corr, vols=None) -> "CovarianceModel":
        """Build from correlation entries (or a CorrelationMatrix); unit vols by default."""
        if not isinstance(corr, CorrelationMatrix):
            corr = CorrelationMatrix(np.asarray(corr, dtype=float))
        if vols is None:
            vols = np.ones(corr.n)
        return cls(vols=np.asarray(vols, dtype=float), corr=corr)

    @classmethod
    def from_covariance(cls, sigma) -> "CovarianceModel":
        """Split a covariance matrix into volatilities and a correlation matrix."""
        arr = np.asarray(sigma, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError(f"covariance matrix must be square, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("covariance matrix contains nonfinite entries")
        diag = np.diag(arr)
        if np.any(diag <= 0.0):
            k = int(np.argmax(diag <= 0.0))
            raise InputError(f"covariance diagonal entry {k} is {diag[k]!r}, not strictly positive")
        vols = np.sqrt(diag)
        corr = arr / np.outer(vols, vols)
        return cls(vols=vols, corr=CorrelationMatrix(corr))

    def with_unit_vols(self) -> "CovarianceModel":
        """Same correlation structure with all volatilities set to one."""
        return CovarianceModel(vols=np.ones(self.n), corr=self.corr)


@dataclass(frozen=True)
class RiskBudgets:
    """Strictly positive budget fractions summing to one."""

    b: np.ndarray

    def __post_init__(self) -> None:
        b = _as_vector(self.b, "budgets")
        if b.shape[0] == 0:
            raise InputError("budgets must not be empty")
        if np.any(b <= 0.0):
            k = int(np.argmax(b <= 0.0))
            raise InputError(f"budgets[{k}] = {b[k]!r}; budgets must be strictly positive")
        total = b.sum()
        if abs(total - 1.0) > BUDGET_SUM_TOL:
            raise InputError(f"budgets sum to {total!r}, expected 1 (normalize them first)")
        object.__setattr__(self, "b", _readonly(b))

    @property
    def n(self) -> int:
        return self.b.shape[0]

    @classmethod
    def uniform(cls, n: int) -> "RiskBudgets":
        """Equal budgets b_i = 1/n (the equal-risk-contribution case)."""
        if n < 1:
            raise InputError(f"need at least one asset, got n = {n}")
        return cls(np.full(n, 1.0 / n))


@dataclass(frozen=True)
class Weights:
    """Strictly positive portfolio weights summing to one."""

    x: np.ndarray

    def __post_init__(self) -> None:
        x = _as_vector(self.x, "weights")
        if np.any(x <= 0.0):
            k = int(np.argmax(x <= 0.0))
            raise DomainError(f"weights[{k}] = {x[k]!r}; weights must be strictly positive")
        total = x.sum()
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InputError(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "x", _readonly(x))

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class RiskMeasureSpec:
    """Risk measure selector: plain volatility, or mean adjusted volatility
    ``R(x) = -mu'x + c * vol(x)`` with penalty coefficient c > 0."""

    kind: RiskMeasureKind = RiskMeasureKind.VOLATILITY
    mu: np.ndarray | None = None
    c: float | None = None

    def __post_init__(self) -> None:
        if self.kind is RiskMeasureKind.VOLATILITY:
            if self.mu is not None or self.c is not None:
                raise InputError("volatility measure takes neither mu nor c")
            return
        if self.mu is None or self.c is None:
            raise InputError("the standard deviation based measure requires both mu and c")
        c = float(self.c)
        if not math.isfinite(c) or c <= 0.0:
            raise InputError(f"c must be a positive real, got {self.c!r}")
        mu = _as_vector(self.mu, "mu")
        object.__setattr__(self, "mu", _readonly(mu))
        object.__setattr__(self, "c", c)

    @classmethod
    def volatility(cls) -> "RiskMeasureSpec":
        return cls()

    @classmethod
    def std_dev_based(cls, mu, c: float) -> "RiskMeasureSpec":
        return cls(kind=RiskMeasureKind.STD_DEV_BASED, mu=np.asarray(mu, dtype=float), c=c)


@dataclass(frozen=True)
class SolverSettings:
    tolerance: float = 1e-8
    max_cycles: int = 10000
    algorithm: Algorithm = Algorithm.CCD

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tolerance) and self.tolerance > 0.0):
            raise InputError(f"tolerance must be positive, got {self.tolerance!r}")
        if int(self.max_cycles) < 1:
            raise InputError(f"max_cycles must be at least 1, got {self.max_cycles!r}")
        object.__setattr__(self, "max_cycles", int(self.max_cycles))
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))


@dataclass(frozen=True)
class SolveOutcome:
    """Result of one solver run.

    ``converged`` is true exactly when ``final_gap`` (the sup-norm deviation
    of normalized risk contributions from the budgets, recomputed densely on
    the returned weights) is within the run's tolerance.
    """

    weights: Weights
    converged: bool
    cycles: int
    elapsed_seconds: float
    final_gap: float
    diagnostic: str | None = None


def _positive_vector(x, n: int, name: str = "x") -> np.ndarray:
    if isinstance(x, Weights):
        x = x.x
    arr = _as_vector(x, name)
    _require_length(arr, n, name)
    if np.any(arr <= 0.0):
        k = int(np.argmax(arr <= 0.0))
        raise DomainError(f"{name}[{k}] = {arr[k]!r}; entries must be strictly positive")
    return arr


def portfolio_volatility(x, cov: CovarianceModel) -> float:
    """Volatility sqrt(x' Sigma x) of a (not necessarily normalized) portfolio."""
    if isinstance(x, Weights):
        x = x.x
    arr = _as_vector(x, "x")
    _require_length(arr, cov.n, "x")
    sx = cov.matrix @ arr
    return float(math.sqrt(arr @ sx))


def _measure_terms(measure: RiskMeasureSpec | None, n: int) -> tuple[np.ndarray, float]:
    """Drift vector and scale used by the generalized risk contributions."""
    if measure is None or measure.kind is RiskMeasureKind.VOLATILITY:
        return np.zeros(n), 1.0
    mu = measure.mu
    _require_length(mu, n, "mu")
    return mu, float(measure.c)


def normalized_risk_contributions(
    x, cov: CovarianceModel, measure: RiskMeasureSpec | None = None
) -> np.ndarray:
    """Per-asset risk contributions normalized to sum to one.

    For the volatility measure this is ``x_i (Sigma x)_i / (x' Sigma x)``;
    the optional standard deviation based measure generalizes it to
    ``x_i (c (Sigma x)_i / vol(x) - mu_i) / R(x)``.  Scale invariant in x.
    """
    arr = _positive_vector(x, cov.n)
    sx = cov.matrix @ arr
    quad = float(arr @ sx)
    mu, c = _measure_terms(measure, cov.n)
    if measure is None or measure.kind is RiskMeasureKind.VOLATILITY:
        return arr * sx / quad
    vol = math.sqrt(quad)
    total = c * vol - float(arr @ mu)
    if total <= 0.0:
        raise DomainError(
            f"risk measure is nonpositive ({total!r}); contributions are undefined "
            "(c is too small relative to mu)"
        )
    return arr * (c * sx / vol - mu) / total


def convergence_gap(
    x, cov: CovarianceModel, budgets: RiskBudgets, measure: RiskMeasureSpec | None = None
) -> float:
    """Sup-norm deviation of normalized risk contributions from the budgets."""
    _require_length(budgets.b, cov.n, "budgets")
    rc = normalized_risk_contributions(x, cov, measure)
    return float(np.abs(rc - budgets.b).max())


def normalize(y) -> Weights:
    """Scale a strictly positive vector so it sums to one."""
    arr = _positive_vector(y, np.asarray(y.x if isinstance(y, Weights) else y).shape[0], "y")
    return Weights(arr / arr.sum())


def rescale_by_vol(y, vols) -> Weights:
    """Map a correlation-space solution to portfolio weights: normalize y_i / vol_i."""
    y_arr = _as_vector(y.x if isinstance(y, Weights) else y, "y")
    v_arr = _as_vector(vols, "vols")
    if y_arr.shape[0] != v_arr.shape[0]:
        raise InputError(f"y has length {y_arr.shape[0]} but vols has length {v_arr.shape[0]}")
    if np.any(y_arr <= 0.0):
        k = int(np.argmax(y_arr <= 0.0))
        raise InputError(f"y[{k}] = {y_arr[k]!r}; entries must be strictly positive")
    if np.any(v_arr <= 0.0):
        k = int(np.argmax(v_arr <= 0.0))
        raise InputError(f"vols[{k}] = {v_arr[k]!r}; entries must be strictly positive")
    scaled = y_arr / v_arr
    return Weights(scaled / scaled.sum())


def sqp_residual(x, cov: CovarianceModel, budgets: RiskBudgets) -> float:
    """Sum of squared deviations of normalized risk contributions from budgets.

    Residual diagnostic only (the objective of the squared-error
    formulation); zero exactly at a risk-budgeting portfolio.
    """
    _require_length(budgets.b, cov.n, "budgets")
    rc = normalized_risk_contributions(x, cov)
    return float(((rc - budgets.b) ** 2).sum())
