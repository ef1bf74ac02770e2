"""Benchmark harness: convergence frequency and timing across solvers.

A study generates one seeded matrix per (n, seed), solves it with every
requested algorithm under identical settings and start points, and
aggregates per (algorithm, n).  Matrix generation is excluded from the
timings, and every (algorithm, size) pair gets one untimed warm-up solve
before measurement.
"""

from __future__ import annotations

import gc
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .dispatch import solve
from .errors import InputError
from .matrixgen import arithmetic_spectrum, correlation_from_spectrum, make_rng
from .model import Algorithm, CovarianceModel, RiskBudgets, SolverSettings

DEFAULT_ALGORITHMS = (Algorithm.CCD, Algorithm.NEWTON)
STATS_HEADER = "algorithm,n,trials,p_s,t_mean_s,t_mean_cs,t_max_s,t_mean_converged_s"
# table cell shown when no trial converged
NC_MARKER = "NC"


@dataclass(frozen=True)
class TrialRecord:
    algorithm: Algorithm
    n: int
    seed: int
    converged: bool
    elapsed_seconds: float
    cycles_or_iterations: int
    final_gap: float

    def __post_init__(self) -> None:
        if self.elapsed_seconds < 0.0:
            raise InputError(f"elapsed_seconds must be nonnegative, got {self.elapsed_seconds!r}")
        if self.final_gap < 0.0:
            raise InputError(f"final_gap must be nonnegative, got {self.final_gap!r}")
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))


@dataclass(frozen=True)
class BenchStats:
    """Per-(algorithm, n) aggregate: convergence percentage and timings.

    t_mean_s averages over all trials including non-converged ones;
    t_mean_converged_s averages converged trials only and is NaN when no
    trial converged.
    """

    algorithm: Algorithm
    n: int
    trials: int
    p_s: float
    t_mean_s: float
    t_max_s: float
    t_mean_converged_s: float

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise InputError(f"trials must be at least 1, got {self.trials!r}")
        if not 0.0 <= self.p_s <= 100.0:
            raise InputError(f"p_s must lie in [0, 100], got {self.p_s!r}")
        if not 0.0 <= self.t_mean_s <= self.t_max_s:
            raise InputError(
                f"need 0 <= t_mean_s <= t_max_s, got {self.t_mean_s!r}, {self.t_max_s!r}"
            )
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))

    @property
    def t_mean_cs(self) -> float:
        """Mean time in hundredths of a second."""
        return 100.0 * self.t_mean_s


def default_trials(n: int) -> int:
    """50 trials at small sizes, 10 from n = 500 up (runtime budget)."""
    return 10 if n >= 500 else 50


def make_instance(n: int, seed: int) -> CovarianceModel:
    """Seeded arithmetic-spectrum correlation instance with unit vols."""
    corr = correlation_from_spectrum(arithmetic_spectrum(n), make_rng(seed))
    return CovarianceModel.from_correlation(corr)


def _solve_record(
    algorithm: Algorithm, cov: CovarianceModel, seed: int, settings: SolverSettings
) -> TrialRecord:
    outcome = solve(
        cov,
        RiskBudgets.uniform(cov.n),
        SolverSettings(
            tolerance=settings.tolerance, max_cycles=settings.max_cycles, algorithm=algorithm
        ),
    )
    return TrialRecord(
        algorithm=algorithm,
        n=cov.n,
        seed=seed,
        converged=outcome.converged,
        elapsed_seconds=outcome.elapsed_seconds,
        cycles_or_iterations=outcome.cycles,
        final_gap=outcome.final_gap,
    )


def run_trial(
    algorithm: Algorithm, n: int, seed: int, settings: SolverSettings | None = None
) -> TrialRecord:
    """Generate the seeded instance and time one solve of it.

    Only the solve is timed; generation happens outside the clock.
    Non-convergence is recorded, not raised.
    """
    if n < 2:
        raise InputError(f"need n >= 2, got {n}")
    settings = settings if settings is not None else SolverSettings()
    return _solve_record(Algorithm(algorithm), make_instance(n, seed), seed, settings)


def aggregate(records: list[TrialRecord]) -> BenchStats:
    """Collapse records for one (algorithm, n) into a stats row."""
    if not records:
        raise InputError("cannot aggregate an empty record list")
    algorithm, n = records[0].algorithm, records[0].n
    for rec in records:
        if rec.algorithm is not algorithm or rec.n != n:
            raise InputError(
                f"records mix ({algorithm.value}, {n}) with ({rec.algorithm.value}, {rec.n})"
            )
    times = [rec.elapsed_seconds for rec in records]
    converged_times = [rec.elapsed_seconds for rec in records if rec.converged]
    return BenchStats(
        algorithm=algorithm,
        n=n,
        trials=len(records),
        p_s=100.0 * len(converged_times) / len(records),
        t_mean_s=sum(times) / len(times),
        t_max_s=max(times),
        t_mean_converged_s=(
            sum(converged_times) / len(converged_times) if converged_times else math.nan
        ),
    )


def run_study(
    sizes,
    trials_per_size: int | None = None,
    algorithms=DEFAULT_ALGORITHMS,
    seed_base: int = 0,
    settings: SolverSettings | None = None,
    parallel: bool = True,
) -> list[TrialRecord]:
    """All trial records for the size grid, ordered by (algorithm, n, seed).

    Every algorithm sees the same matrix for a given (n, seed).  Warm-up
    solves (one per algorithm and size, on a separate instance) run before
    any measurement.  With parallel=True trials run on a thread pool;
    records come back in the same deterministic order either way.
    """
    sizes = [int(n) for n in sizes]
    if not sizes:
        raise InputError("sizes must not be empty")
    for n in sizes:
        if n < 2:
            raise InputError(f"need n >= 2, got {n}")
    algorithms = [Algorithm(a) for a in algorithms]
    if not algorithms:
        raise InputError("algorithms must not be empty")
    settings = settings if settings is not None else SolverSettings()

    records: list[TrialRecord] = []
    # collector pauses are measurement noise at millisecond scales, so the
    # timed region runs with automatic collection off
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for n in sizes:
            trials = default_trials(n) if trials_per_size is None else int(trials_per_size)
            if trials < 1:
                raise InputError(f"trials must be at least 1, got {trials}")
            # warm-up on a dedicated seed outside the measured set
            warm_cov = make_instance(n, seed_base + trials)
            for algorithm in algorithms:
                _solve_record(algorithm, warm_cov, seed_base + trials, settings)

            seeds = [seed_base + j for j in range(trials)]

            def trial_batch(seed: int, size: int = n) -> list[TrialRecord]:
                cov = make_instance(size, seed)
                return [_solve_record(alg, cov, seed, settings) for alg in algorithms]

            if parallel and len(seeds) > 1:
                workers = min(len(seeds), os.cpu_count() or 1, 4)
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    batches = list(pool.map(trial_batch, seeds))
            else:
                batches = [trial_batch(seed) for seed in seeds]
            for batch in batches:
                records.extend(batch)
            gc.collect()
    finally:
        if gc_was_enabled:
            gc.enable()

    order = {algorithm: k for k, algorithm in enumerate(algorithms)}
    records.sort(key=lambda rec: (order[rec.algorithm], rec.n, rec.seed))
    return records


def scaling_study(
    sizes,
    trials_per_size: int | None = None,
    algorithms=DEFAULT_ALGORITHMS,
    seed_base: int = 0,
    settings: SolverSettings | None = None,
    parallel: bool = True,
) -> list[BenchStats]:
    """One BenchStats row per (algorithm, size), algorithm-major order."""
    algorithms = [Algorithm(a) for a in algorithms]
    records = run_study(sizes, trials_per_size, algorithms, seed_base, settings, parallel)
    rows = []
    for algorithm in algorithms:
        for n in [int(s) for s in sizes]:
            group = [r for r in records if r.algorithm is algorithm and r.n == n]
            rows.append(aggregate(group))
    return rows


def stats_csv(rows: list[BenchStats]) -> str:
    lines = [STATS_HEADER]
    for row in rows:
        lines.append(
            f"{row.algorithm.value},{row.n},{row.trials},{row.p_s:.2f},"
            f"{row.t_mean_s:.6f},{row.t_mean_cs:.4f},{row.t_max_s:.6f},"
            f"{row.t_mean_converged_s:.6f}"
        )
    return "\n".join(lines) + "\n"


def plot_csv(rows: list[BenchStats]) -> str:
    """Size-major series of t_mean_s, one column per algorithm."""
    algorithms: list[Algorithm] = []
    sizes: list[int] = []
    for row in rows:
        if row.algorithm not in algorithms:
            algorithms.append(row.algorithm)
        if row.n not in sizes:
            sizes.append(row.n)
    cell = {(row.algorithm, row.n): row.t_mean_s for row in rows}
    for algorithm in algorithms:
        for n in sizes:
            if (algorithm, n) not in cell:
                raise InputError(f"missing stats row for ({algorithm.value}, {n})")
    lines = ["n," + ",".join(a.value for a in algorithms)]
    for n in sorted(sizes):
        lines.append(f"{n}," + ",".join(f"{cell[(a, n)]:.6f}" for a in algorithms))
    return "\n".join(lines) + "\n"


def stats_table(rows: list[BenchStats]) -> str:
    """Aligned text table; converged-mean shows NC when nothing converged."""
    header = ["algorithm", "n", "trials", "p_s", "t_mean_s", "t_mean_cs", "t_max_s", "t_conv_s"]
    body = []
    for row in rows:
        conv = NC_MARKER if math.isnan(row.t_mean_converged_s) else f"{row.t_mean_converged_s:.4f}"
        body.append(
            [
                row.algorithm.value,
                str(row.n),
                str(row.trials),
                f"{row.p_s:.2f}",
                f"{row.t_mean_s:.4f}",
                f"{row.t_mean_cs:.2f}",
                f"{row.t_max_s:.4f}",
                conv,
            ]
        )
    widths = [max(len(line[k]) for line in [header] + body) for k in range(len(header))]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    return "\n".join(fmt.format(*line) for line in [header] + body) + "\n"
