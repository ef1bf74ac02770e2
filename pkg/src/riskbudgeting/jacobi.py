"""Fixed-point iteration on portfolio betas.

Each step rescales the budgets by the current betas and renormalizes.
The iteration is cheap but fragile: on badly conditioned instances it
oscillates instead of converging, and the solver reports that honestly
instead of masking it with damping tricks.
"""

from __future__ import annotations

import time

import numpy as np

from .errors import InputError, NumericError
from .model import (
    CovarianceModel,
    RiskBudgets,
    SolveOutcome,
    SolverSettings,
    Weights,
    convergence_gap,
)

# iterations without a new best gap before declaring oscillation
STALL_LIMIT = 100


def _positive_vector(x, n: int) -> np.ndarray:
    arr = np.asarray(x.x if isinstance(x, Weights) else x, dtype=float)
    if arr.shape != (n,):
        raise InputError(f"x has shape {arr.shape}, expected ({n},)")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise InputError("x must be strictly positive and finite")
    return arr


def betas(x, cov: CovarianceModel) -> np.ndarray:
    """Asset betas (Sigma x)_i / (x' Sigma x); weighted by x they sum to 1."""
    arr = _positive_vector(x, cov.n)
    sx = cov.matrix @ arr
    return sx / float(arr @ sx)


def jacobi_iterate(x_k, cov: CovarianceModel, b: RiskBudgets) -> np.ndarray:
    """Next iterate (b_i / beta_i) / sum_j (b_j / beta_j); sums to 1.

    A nonpositive beta (possible with negative correlations) makes the
    step undefined and raises a numeric error; solve_jacobi converts that
    into a non-converged outcome.
    """
    if b.n != cov.n:
        raise InputError(f"budgets have length {b.n}, expected {cov.n}")
    beta = betas(x_k, cov)
    if np.any(beta <= 0.0):
        k = int(np.argmax(beta <= 0.0))
        raise NumericError(f"beta[{k}] = {beta[k]!r} is not positive; step undefined")
    ratio = b.b / beta
    return ratio / ratio.sum()


def solve_jacobi(
    cov: CovarianceModel, b: RiskBudgets, settings: SolverSettings | None = None
) -> SolveOutcome:
    """Iterate from equal weights until the gap meets tolerance.

    Halts with converged = false when the budget runs out, when the gap
    fails to improve for 100 consecutive iterations (oscillation), or when
    a step becomes undefined; the latter two attach a diagnostic.
    """
    settings = settings if settings is not None else SolverSettings()
    if b.n != cov.n:
        raise InputError(f"budgets have length {b.n}, expected {cov.n}")

    start = time.perf_counter()
    x = np.full(cov.n, 1.0 / cov.n)
    best_gap = np.inf
    stall = 0
    iteration = 0
    diagnostic = None
    while True:
        gap = convergence_gap(x, cov, b)
        if gap < best_gap:
            best_gap = gap
            stall = 0
        else:
            stall += 1
        if gap <= settings.tolerance:
            break
        if iteration >= settings.max_cycles:
            break
        if stall >= STALL_LIMIT:
            diagnostic = f"gap did not improve for {STALL_LIMIT} consecutive iterations"
            break
        try:
            x = jacobi_iterate(x, cov, b)
        except NumericError as exc:
            diagnostic = str(exc)
            break
        iteration += 1
    elapsed = time.perf_counter() - start
    return SolveOutcome(
        weights=Weights(x / x.sum()),
        converged=gap <= settings.tolerance,
        cycles=iteration,
        elapsed_seconds=elapsed,
        final_gap=gap,
        diagnostic=diagnostic,
    )
