"""Command-line client for the solve/generate/bench service.

Commands run against an in-process copy of the HTTP service by default,
so no daemon is needed for file-based workflows; pass --server to target
a running instance instead.  Exit codes: 0 success (solve: converged),
2 solve finished without converging, 1 bad input or transport failure.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import httpx

from .errors import RiskBudgetingError
from .io import read_matrix_csv, read_vector_csv, write_matrix_csv
from .model import Algorithm

VALID_ALGORITHMS = ", ".join(a.value for a in Algorithm)


def _post(server: str | None, path: str, payload: dict) -> tuple[int, dict]:
    """POST to the remote server when given, else to the in-process app."""
    try:
        if server:
            with httpx.Client(base_url=server, timeout=None) as client:
                resp = client.post(path, json=payload)
        else:
            from .service import create_app

            async def _call() -> httpx.Response:
                transport = httpx.ASGITransport(app=create_app())
                async with httpx.AsyncClient(
                    transport=transport, base_url="http://riskbudgeting.local", timeout=None
                ) as client:
                    return await client.post(path, json=payload)

            resp = asyncio.run(_call())
    except httpx.HTTPError as exc:
        _fail(f"request to {path} failed: {exc}")
    try:
        body = resp.json()
    except ValueError:
        _fail(f"service returned a non-JSON response (status {resp.status_code})")
    return resp.status_code, body


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _check_status(status: int, body: dict) -> None:
    if status != 200:
        _fail(body.get("detail", f"service returned status {status}"))


def _parse_algorithms(spec: str) -> list[str]:
    names = [token.strip() for token in spec.split(",") if token.strip()]
    if not names:
        _fail(f"no algorithms given; valid algorithms: {VALID_ALGORITHMS}")
    for name in names:
        if name not in {a.value for a in Algorithm}:
            _fail(f"unknown algorithm {name!r}; valid algorithms: {VALID_ALGORITHMS}")
    return names


def _parse_sizes(spec: str) -> list[int]:
    try:
        sizes = [int(token) for token in spec.split(",") if token.strip()]
    except ValueError:
        _fail(f"sizes must be comma-separated integers, got {spec!r}")
    if not sizes:
        _fail("sizes must not be empty")
    return sizes


@click.group()
@click.option("--server", default=None, metavar="URL", help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Risk-budgeting portfolio tools: solve, matrix generation, benchmarks."""
    ctx.obj = server


@main.command()
@click.option("--matrix", "matrix_path", required=True, type=click.Path(), help="Square matrix CSV (no header).")
@click.option("--matrix-kind", type=click.Choice(["corr", "cov"]), required=True, help="Interpret the matrix as a correlation or covariance.")
@click.option("--vols", "vols_path", type=click.Path(), default=None, help="Volatility vector CSV; required with --matrix-kind corr.")
@click.option("--budgets", "budgets_path", type=click.Path(), default=None, help="Budget vector CSV; defaults to uniform budgets.")
@click.option("--algo", default="ccd", metavar="NAME", help=f"Solver: {VALID_ALGORITHMS}.")
@click.option("--mu", "mu_path", type=click.Path(), default=None, help="Expected-return vector CSV for the mean adjusted measure.")
@click.option("--risk-c", "risk_c", type=float, default=None, help="Volatility coefficient c of the mean adjusted measure.")
@click.option("--tol", default=1e-8, show_default=True, help="Convergence tolerance on the contribution gap.")
@click.option("--max-cycles", default=10000, show_default=True, help="Iteration budget.")
@click.option("--output", "output_path", type=click.Path(), default=None, help="Write the JSON report here as well as stdout.")
@click.pass_context
def solve(
    ctx: click.Context,
    matrix_path: str,
    matrix_kind: str,
    vols_path: str | None,
    budgets_path: str | None,
    algo: str,
    mu_path: str | None,
    risk_c: float | None,
    tol: float,
    max_cycles: int,
    output_path: str | None,
) -> None:
    """Solve for risk-budgeting weights and print the JSON report."""
    if algo not in {a.value for a in Algorithm}:
        _fail(f"unknown algorithm {algo!r}; valid algorithms: {VALID_ALGORITHMS}")
    if matrix_kind == "corr" and vols_path is None:
        _fail("--vols is required when --matrix-kind is corr")
    try:
        payload: dict = {
            "matrix": read_matrix_csv(matrix_path).tolist(),
            "matrix_kind": matrix_kind,
            "algorithm": algo,
            "tolerance": tol,
            "max_cycles": max_cycles,
        }
        if vols_path is not None:
            payload["vols"] = read_vector_csv(vols_path).tolist()
        if budgets_path is not None:
            payload["budgets"] = read_vector_csv(budgets_path).tolist()
        if mu_path is not None:
            payload["mu"] = read_vector_csv(mu_path).tolist()
    except RiskBudgetingError as exc:
        _fail(str(exc))
    if risk_c is not None:
        payload["c"] = risk_c

    status, body = _post(ctx.obj, "/solve", payload)
    _check_status(status, body)
    text = json.dumps(body, indent=2)
    click.echo(text)
    if output_path is not None:
        try:
            Path(output_path).write_text(text + "\n")
        except OSError as exc:
            _fail(f"cannot write report to {output_path}: {exc}")
    sys.exit(0 if body.get("converged") else 2)


@main.command()
@click.option("--n", "n", required=True, type=int, help="Matrix dimension (at least 2).")
@click.option("--seed", default=0, show_default=True, type=int, help="Generator seed.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Where to write the matrix CSV.")
@click.option("--lam-min", "lam_min", type=float, default=None, help="Smallest eigenvalue of the arithmetic spectrum (default 2/(n+1)).")
@click.pass_context
def gen(ctx: click.Context, n: int, seed: int, out_path: str, lam_min: float | None) -> None:
    """Generate a seeded random correlation matrix and write it as CSV."""
    payload = {"n": n, "seed": seed}
    if lam_min is not None:
        payload["lam_min"] = lam_min
    status, body = _post(ctx.obj, "/generate", payload)
    _check_status(status, body)
    try:
        write_matrix_csv(out_path, body["matrix"])
    except OSError as exc:
        _fail(f"cannot write matrix to {out_path}: {exc}")
    click.echo(
        f"wrote {body['n']}x{body['n']} correlation matrix to {out_path}\n"
        f"min eigenvalue: {body['min_eigenvalue']:.12g}\n"
        f"max eigenvalue: {body['max_eigenvalue']:.12g}\n"
        f"condition number: {body['condition_number']:.12g}"
    )


@main.command()
@click.option("--sizes", required=True, metavar="N1,N2,...", help="Comma-separated matrix sizes.")
@click.option("--trials", type=int, default=None, help="Trials per size; default 10 for n >= 500, else 50.")
@click.option("--algos", default="ccd,newton", show_default=True, metavar="NAMES", help="Comma-separated algorithms.")
@click.option("--seed", default=0, show_default=True, type=int, help="Base seed; trial k uses seed + k.")
@click.option("--tol", default=1e-8, show_default=True, help="Convergence tolerance.")
@click.option("--max-cycles", default=10000, show_default=True, help="Iteration budget per solve.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Where to write the stats CSV.")
@click.option("--plot-out", "plot_path", type=click.Path(), default=None, help="Where to write the plot-series CSV (default: <out>.plot.csv).")
@click.option("--no-parallel", is_flag=True, help="Run trials sequentially for clean timings.")
@click.pass_context
def bench(
    ctx: click.Context,
    sizes: str,
    trials: int | None,
    algos: str,
    seed: int,
    tol: float,
    max_cycles: int,
    out_path: str,
    plot_path: str | None,
    no_parallel: bool,
) -> None:
    """Benchmark solvers on seeded instances; write stats and plot CSVs."""
    payload = {
        "sizes": _parse_sizes(sizes),
        "algorithms": _parse_algorithms(algos),
        "seed": seed,
        "tolerance": tol,
        "max_cycles": max_cycles,
        "parallel": not no_parallel,
    }
    if trials is not None:
        payload["trials"] = trials
    status, body = _post(ctx.obj, "/bench", payload)
    _check_status(status, body)
    if plot_path is None:
        plot_path = str(Path(out_path).with_suffix(".plot.csv"))
    try:
        Path(out_path).write_text(body["stats_csv"])
        Path(plot_path).write_text(body["plot_csv"])
    except OSError as exc:
        _fail(f"cannot write benchmark output: {exc}")
    click.echo(body["table"], nl=False)
    click.echo(f"stats CSV: {out_path}\nplot CSV: {plot_path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the HTTP service under uvicorn."""
    import uvicorn

    uvicorn.run("riskbudgeting.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
