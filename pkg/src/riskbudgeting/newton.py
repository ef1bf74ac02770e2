"""Damped Newton solver for the log-barrier form of the risk-budgeting problem.

Minimizes f(y) = 1/2 y'Cy - sum_i b_i ln y_i over the positive orthant.
While the decrement measure is at least beta the step is shortened by
1/(1 + decrement); once it drops below beta full steps are taken and
convergence is quadratic.  Newton systems are solved through a Cholesky
factorization, never by forming the inverse Hessian.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DomainError, InputError, NumericError
from .model import (
    CorrelationMatrix,
    CovarianceModel,
    RiskBudgets,
    SolveOutcome,
    SolverSettings,
    convergence_gap,
    rescale_by_vol,
)

LAMBDA_STAR = (3.0 - math.sqrt(5.0)) / 2.0
# maximum step halvings when a step would leave the positive orthant
MAX_HALVINGS = 60
DEFAULT_MAX_ITERATIONS = 500


class DecrementKind(str, Enum):
    """Which decrement controls damping: the exact Newton decrement
    sqrt(g'H^{-1}g), or the cheaper step-over-iterate sup norm proxy."""

    LAMBDA_F = "lambda_f"
    DELTA_F = "delta_f"


class Phase(str, Enum):
    DAMPED = "damped"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class NewtonConstants:
    lambda_star: float = LAMBDA_STAR
    beta: float = 0.95 * LAMBDA_STAR
    decrement_kind: DecrementKind = DecrementKind.DELTA_F
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < self.lambda_star < 1.0:
            raise InputError(
                f"need 0 < beta < lambda_star < 1, got beta = {self.beta!r}, "
                f"lambda_star = {self.lambda_star!r}"
            )
        if int(self.max_iterations) < 1:
            raise InputError(f"max_iterations must be positive, got {self.max_iterations!r}")
        object.__setattr__(self, "decrement_kind", DecrementKind(self.decrement_kind))
        object.__setattr__(self, "max_iterations", int(self.max_iterations))


@dataclass(frozen=True)
class NewtonState:
    y: np.ndarray
    iteration: int = 0
    phase: Phase = Phase.DAMPED

    def __post_init__(self) -> None:
        y = np.array(self.y, dtype=float)
        if y.ndim != 1:
            raise InputError(f"y must be a vector, got shape {y.shape}")
        if not np.all(np.isfinite(y)) or np.any(y <= 0.0):
            raise DomainError("Newton iterate must be strictly positive and finite")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "phase", Phase(self.phase))


def _corr_entries(corr) -> np.ndarray:
    if isinstance(corr, CorrelationMatrix):
        return corr.entries
    arr = np.asarray(corr, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"matrix must be square, got shape {arr.shape}")
    return arr


def _budget_vector(b, n: int) -> np.ndarray:
    vec = b.b if isinstance(b, RiskBudgets) else np.asarray(b, dtype=float)
    if vec.shape != (n,):
        raise InputError(f"budgets have shape {vec.shape}, expected ({n},)")
    return vec


def _positive_y(y, n: int) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.shape != (n,):
        raise InputError(f"y has shape {arr.shape}, expected ({n},)")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("y must be strictly positive and finite")
    return arr


def objective(y, corr, b) -> float:
    """Barrier objective 1/2 y'Cy - sum_i b_i ln y_i; strictly convex on y > 0."""
    c_mat = _corr_entries(corr)
    arr = _positive_y(y, c_mat.shape[0])
    b_vec = _budget_vector(b, c_mat.shape[0])
    return float(0.5 * (arr @ (c_mat @ arr)) - b_vec @ np.log(arr))


def gradient(y, corr, b) -> np.ndarray:
    """Cy - b/y."""
    c_mat = _corr_entries(corr)
    arr = _positive_y(y, c_mat.shape[0])
    b_vec = _budget_vector(b, c_mat.shape[0])
    return c_mat @ arr - b_vec / arr


def hessian(y, corr, b) -> np.ndarray:
    """C + diag(b/y^2); positive definite for every strictly positive y."""
    c_mat = _corr_entries(corr)
    arr = _positive_y(y, c_mat.shape[0])
    b_vec = _budget_vector(b, c_mat.shape[0])
    h = np.array(c_mat)
    h[np.diag_indices_from(h)] += b_vec / arr**2
    return h


def _direction_core(
    y: np.ndarray,
    c_mat: np.ndarray,
    b_vec: np.ndarray,
    sy: np.ndarray | None = None,
    h_buf: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    # sy lets callers that already hold C @ y skip the second matvec, and
    # h_buf lets the solve loop reuse one Hessian-sized buffer across
    # iterations instead of paying an n^2 allocation per step
    if sy is None:
        sy = c_mat @ y
    g = sy - b_vec / y
    if h_buf is None:
        h = np.array(c_mat)
    else:
        h = h_buf
        np.copyto(h, c_mat)
    h[np.diag_indices_from(h)] += b_vec / y**2
    try:
        factor = cho_factor(h, lower=True, check_finite=False, overwrite_a=True)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Hessian factorization failed: {exc}") from None
    delta = cho_solve(factor, g, check_finite=False)
    lambda_sq = float(g @ delta)
    return delta, math.sqrt(max(lambda_sq, 0.0))


def newton_direction(y, corr, b) -> tuple[np.ndarray, float]:
    """Newton step delta with H delta = g, and the decrement sqrt(g'delta).

    The system is solved via Cholesky factors of the Hessian; the inverse
    is never formed.
    """
    c_mat = _corr_entries(corr)
    arr = _positive_y(y, c_mat.shape[0])
    b_vec = _budget_vector(b, c_mat.shape[0])
    return _direction_core(arr, c_mat, b_vec)


def proxy_decrement(delta, y) -> float:
    """Cheap decrement stand-in max_i |delta_i / y_i|."""
    arr = _positive_y(y, np.asarray(delta).shape[0])
    return float(np.abs(np.asarray(delta, dtype=float) / arr).max())


def initial_point(corr) -> np.ndarray:
    """Scaled equal-weight start y0 = (1'C1)^{-1/2} * 1."""
    c_mat = _corr_entries(corr)
    total = float(c_mat.sum())
    if total <= 0.0:
        raise NumericError(f"1'C1 = {total!r} is not positive; matrix data is corrupted")
    return np.full(c_mat.shape[0], 1.0 / math.sqrt(total))


def _apply_step(
    y: np.ndarray, delta: np.ndarray, m: float, phase: Phase, constants: NewtonConstants
) -> tuple[np.ndarray, Phase]:
    step = delta / (1.0 + m) if m >= constants.beta else delta
    y_next = y - step
    halvings = 0
    while np.any(y_next <= 0.0):
        if halvings >= MAX_HALVINGS:
            raise NumericError(
                "step halving failed to restore positivity; iterate is degenerate"
            )
        step = step / 2.0
        y_next = y - step
        halvings += 1

    if m < constants.beta:
        next_phase = Phase.QUADRATIC
    elif phase is Phase.QUADRATIC and m > constants.lambda_star:
        next_phase = Phase.DAMPED
    else:
        next_phase = phase
    return y_next, next_phase


def newton_iterate(
    state: NewtonState, corr, b, constants: NewtonConstants | None = None
) -> NewtonState:
    """One Newton step: damped while the decrement is >= beta, full below.

    If a step would leave the positive orthant it is halved until it does
    not (rounding safeguard; the damped step cannot leave it in exact
    arithmetic).  The phase moves to quadratic when the decrement first
    drops below beta and reverts only if it later exceeds lambda_star.
    """
    constants = constants if constants is not None else NewtonConstants()
    delta, lambda_f = newton_direction(state.y, corr, b)
    if constants.decrement_kind is DecrementKind.LAMBDA_F:
        m = lambda_f
    else:
        m = proxy_decrement(delta, state.y)
    y_next, phase = _apply_step(state.y, delta, m, state.phase, constants)
    return NewtonState(y=y_next, iteration=state.iteration + 1, phase=phase)


def solve_newton(
    cov: CovarianceModel,
    b: RiskBudgets,
    settings: SolverSettings | None = None,
    constants: NewtonConstants | None = None,
) -> SolveOutcome:
    """Iterate Newton steps on the correlation-space problem until the
    contribution gap of the rescaled, normalized weights meets tolerance.

    The iteration budget is the smaller of settings.max_cycles and
    constants.max_iterations; Newton finishing in tens of iterations is
    normal, so hitting 500 signals a pathological instance.
    """
    settings = settings if settings is not None else SolverSettings()
    constants = constants if constants is not None else NewtonConstants()
    if b.n != cov.n:
        raise InputError(f"budgets have length {b.n}, expected {cov.n}")
    budget = min(settings.max_cycles, constants.max_iterations)
    use_lambda = constants.decrement_kind is DecrementKind.LAMBDA_F

    start = time.perf_counter()
    c_mat = cov.corr.entries
    b_vec = b.b
    y = initial_point(cov.corr)
    h_buf = np.empty_like(c_mat)
    phase = Phase.DAMPED
    iteration = 0
    while True:
        # the contribution gap is scale invariant and identical in
        # correlation and covariance space, so one matvec serves both the
        # stopping test and, via _direction_core, the gradient
        sy = c_mat @ y
        rc = y * sy / float(y @ sy)
        gap = float(np.abs(rc - b_vec).max())
        if gap <= settings.tolerance or iteration >= budget:
            break
        delta, lambda_f = _direction_core(y, c_mat, b_vec, sy, h_buf)
        m = lambda_f if use_lambda else float(np.abs(delta / y).max())
        y, phase = _apply_step(y, delta, m, phase, constants)
        iteration += 1

    weights = rescale_by_vol(y, cov.vols)
    final_gap = convergence_gap(weights, cov, b)
    elapsed = time.perf_counter() - start
    return SolveOutcome(
        weights=weights,
        converged=final_gap <= settings.tolerance,
        cycles=iteration,
        elapsed_seconds=elapsed,
        final_gap=final_gap,
    )
