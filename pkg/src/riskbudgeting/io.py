"""CSV reading and writing for matrices, vectors and reports.

Matrix files are plain comma-separated numbers, one matrix row per line,
no header.  Vector files are either one value per line or a single
comma-separated line.  Values are written with 17 significant digits so a
write/read round trip reproduces every float bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InputError

MATRIX_FORMAT = "%.17g"


def _parse_cell(token: str, row: int, col: int, path: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise InputError(
            f"{path}: row {row}, column {col}: {token.strip()!r} is not a number"
        ) from None


def read_matrix_csv(path) -> np.ndarray:
    """Read a square matrix; errors name the offending 1-based row/column."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"matrix file not found: {path}")
    rows: list[list[float]] = []
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise InputError(f"{path}: file is empty")
    for i, line in enumerate(lines, start=1):
        tokens = line.split(",")
        rows.append([_parse_cell(tok, i, j, str(path)) for j, tok in enumerate(tokens, start=1)])
    width = len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise InputError(
                f"{path}: row {i} has {len(row)} columns, expected {width} (from row 1)"
            )
    if len(rows) != width:
        raise InputError(f"{path}: matrix has {len(rows)} rows but {width} columns; must be square")
    return np.asarray(rows, dtype=float)


def read_vector_csv(path) -> np.ndarray:
    """Read a vector from one-per-line or single-line comma-separated values."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"vector file not found: {path}")
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise InputError(f"{path}: file is empty")
    values: list[float] = []
    if len(lines) == 1:
        for j, tok in enumerate(lines[0].split(","), start=1):
            values.append(_parse_cell(tok, 1, j, str(path)))
        return np.asarray(values, dtype=float)
    for i, line in enumerate(lines, start=1):
        tokens = line.split(",")
        if len(tokens) != 1:
            raise InputError(
                f"{path}: row {i} has {len(tokens)} columns; a vector file needs one per line"
            )
        values.append(_parse_cell(tokens[0], i, 1, str(path)))
    return np.asarray(values, dtype=float)


def write_matrix_csv(path, matrix: np.ndarray) -> None:
    """Write a matrix as headerless CSV at full float precision."""
    arr = np.asarray(matrix, dtype=float)
    lines = [",".join(MATRIX_FORMAT % v for v in row) for row in np.atleast_2d(arr)]
    Path(path).write_text("\n".join(lines) + "\n")


def round_significant(value: float, digits: int = 12) -> float:
    """Round to the given number of significant digits."""
    return float(f"{value:.{digits}g}")


def solve_report(
    algorithm: str,
    converged: bool,
    cycles: int,
    elapsed_seconds: float,
    final_gap: float,
    weights,
    risk_contributions,
) -> dict:
    """Assemble the JSON-serializable solve report with weights rounded
    to 12 significant digits."""
    return {
        "algorithm": algorithm,
        "converged": bool(converged),
        "cycles": int(cycles),
        "elapsed_seconds": float(elapsed_seconds),
        "final_gap": float(final_gap),
        "weights": [round_significant(float(w)) for w in np.asarray(weights)],
        "risk_contributions": [
            round_significant(float(r)) for r in np.asarray(risk_contributions)
        ],
    }


def dump_report(report: dict, path=None) -> str:
    text = json.dumps(report, indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
