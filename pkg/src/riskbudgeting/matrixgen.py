"""Random correlation matrices with a prescribed arithmetic spectrum.

Construction: draw a Haar orthogonal Q, form A = Q diag(lam) Q', then apply
Givens rotations that pair a diagonal entry below 1 with one above 1 and
set the smaller one exactly to 1.  Rotations are similarity transforms, so
the eigenvalues never move; after at most n - 1 of them every diagonal
entry is 1 and A is a correlation matrix with the requested spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import CorrelationMatrix

SPECTRUM_SUM_TOL = 1e-10
SPACING_TOL = 1e-12
# diagonal entries within this of 1 are considered done during rotation
DIAG_LOOP_TOL = 1e-12
# a residual above this after the rotation pass means the pairing logic is broken
RESIDUAL_CEILING = 1e-9

SeededRng = np.random.Generator


def make_rng(seed: int) -> SeededRng:
    """Deterministic generator stream for a 64-bit unsigned seed."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise InputError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SpectrumSpec:
    """Arithmetically spaced positive eigenvalues summing to n."""

    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.shape[0] == 0:
            raise InputError(f"eigenvalues must be a nonempty vector, got shape {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise InputError("eigenvalues contain nonfinite entries")
        if np.any(lam <= 0.0):
            k = int(np.argmax(lam <= 0.0))
            raise InputError(f"eigenvalues[{k}] = {lam[k]!r}; all eigenvalues must be positive")
        n = lam.shape[0]
        total = lam.sum()
        if abs(total - n) > SPECTRUM_SUM_TOL:
            raise InputError(
                f"eigenvalues sum to {total!r}, expected {n} (the trace of a correlation matrix)"
            )
        if n >= 3:
            gaps = np.diff(lam)
            if np.abs(gaps - gaps[0]).max() > SPACING_TOL:
                raise InputError("eigenvalues must be arithmetically spaced")
        lam = np.array(lam)
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def arithmetic_spectrum(n: int, lam_min: float | None = None) -> SpectrumSpec:
    """Evenly spaced spectrum lam_i = 2i/(n+1); sums to n with positive minimum.

    ``lam_min`` overrides the smallest eigenvalue (the largest becomes
    2 - lam_min so the sum stays n); it must lie in (0, 1].
    """
    n = int(n)
    if n < 2:
        raise InputError(f"need n >= 2 for an arithmetic spectrum, got {n}")
    if lam_min is None:
        lam_min = 2.0 / (n + 1)
    lam_min = float(lam_min)
    if not (0.0 < lam_min <= 1.0):
        raise InputError(f"lam_min must lie in (0, 1], got {lam_min!r}")
    return SpectrumSpec(np.linspace(lam_min, 2.0 - lam_min, n))


def random_orthogonal(n: int, rng: SeededRng) -> np.ndarray:
    """Haar-distributed orthogonal matrix from a Gaussian QR with sign fixing."""
    n = int(n)
    if n < 2:
        raise InputError(f"need n >= 2 for a random orthogonal matrix, got {n}")
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0.0] = 1.0
    return q * d


def _rotate_to_unit(a: np.ndarray, i: int, j: int) -> None:
    """Givens similarity rotation in the (i, j) plane setting a[i, i] to 1.

    Requires a[i, i] < 1 < a[j, j]; the quadratic for the tangent then has
    real roots of opposite sign and we take the smaller in magnitude.
    """
    alpha = a[j, j] - 1.0
    beta = 2.0 * a[i, j]
    gamma = a[i, i] - 1.0
    disc = math.sqrt(beta * beta - 4.0 * alpha * gamma)
    q = -(beta + disc) / 2.0 if beta >= 0.0 else -(beta - disc) / 2.0
    t1 = q / alpha
    t2 = gamma / q
    t = t1 if abs(t1) <= abs(t2) else t2
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c

    ri = a[i, :].copy()
    rj = a[j, :].copy()
    a[i, :] = c * ri + s * rj
    a[j, :] = c * rj - s * ri
    ci = a[:, i].copy()
    cj = a[:, j].copy()
    a[:, i] = c * ci + s * cj
    a[:, j] = c * cj - s * ci

    a[i, i] = 1.0
    sym_i = 0.5 * (a[i, :] + a[:, i])
    a[i, :] = sym_i
    a[:, i] = sym_i
    sym_j = 0.5 * (a[j, :] + a[:, j])
    a[j, :] = sym_j
    a[:, j] = sym_j
    a[i, i] = 1.0


def correlation_from_spectrum(spec: SpectrumSpec, rng: SeededRng) -> CorrelationMatrix:
    """Seeded correlation matrix whose eigenvalues match ``spec`` within 1e-8."""
    n = spec.n
    if n == 1:
        return CorrelationMatrix(np.ones((1, 1)))
    q = random_orthogonal(n, rng)
    a = (q * spec.eigenvalues) @ q.T
    a = (a + a.T) / 2.0

    # each rotation pins one diagonal entry at exactly 1 and never revisits
    # it, so n - 1 rotations always suffice
    for _ in range(n):
        d = a.diagonal()
        if np.abs(d - 1.0).max() <= DIAG_LOOP_TOL:
            break
        below = np.flatnonzero(d < 1.0 - DIAG_LOOP_TOL)
        above = np.flatnonzero(d > 1.0)
        if below.size == 0 or above.size == 0:
            # deviations all on one side: only trace roundoff is left
            below = np.flatnonzero(d < 1.0)
            above = np.flatnonzero(d > 1.0 + DIAG_LOOP_TOL)
            if below.size == 0 or above.size == 0:
                break
        _rotate_to_unit(a, int(below[0]), int(above[0]))

    residual = float(np.abs(a.diagonal() - 1.0).max())
    if residual > RESIDUAL_CEILING:
        raise RuntimeError(
            f"internal error: rotation pass left diagonal residual {residual:.3e}; "
            "no valid pivot pair was available"
        )
    np.fill_diagonal(a, 1.0)
    a = (a + a.T) / 2.0
    return CorrelationMatrix(a)
