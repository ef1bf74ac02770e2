"""Instance builders shared across test modules.

These deliberately avoid the package's own matrix generator so tests of
one module never depend on the correctness of another: correlations come
from normalized Gram matrices, an independent construction.
"""

import numpy as np

from riskbudgeting import CovarianceModel, RiskBudgets


def random_correlation_entries(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n + 2))
    s = g @ g.T + 0.05 * n * np.eye(n)
    d = np.sqrt(np.diag(s))
    return s / np.outer(d, d)


def random_instance(n: int, seed: int, unit_vols: bool = False) -> CovarianceModel:
    rng = np.random.default_rng(seed)
    corr = random_correlation_entries(n, rng)
    vols = np.ones(n) if unit_vols else rng.uniform(0.05, 0.4, size=n)
    return CovarianceModel.from_correlation(corr, vols)


def dirichlet_budgets(n: int, rng: np.random.Generator) -> RiskBudgets:
    b = rng.dirichlet(np.full(n, 2.0))
    b = np.clip(b, 1e-3, None)
    return RiskBudgets(b / b.sum())


def two_asset_cov(rho: float, vols=(0.1, 0.2)) -> CovarianceModel:
    corr = np.array([[1.0, rho], [rho, 1.0]])
    return CovarianceModel.from_correlation(corr, np.asarray(vols, dtype=float))
