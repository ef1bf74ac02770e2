"""Suite-wide fixtures plus the acceptance-criteria summary.

Tests marked ``@pytest.mark.acceptance(num, label)`` get one PASS/FAIL
line each in a dedicated terminal section after the run, so the ten
top-level checks can be read off at a glance.
"""

import numpy as np
import pytest

from riskbudgeting import CovarianceModel, RiskBudgets, solve_jacobi, solve_newton
from riskbudgeting.ccd import warm_up

_CRITERIA_LABELS: dict[int, str] = {}
_CRITERIA_RESULTS: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(num, label): top-level acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    num, label = marker.args
    _CRITERIA_LABELS[num] = label
    if report.passed:
        _CRITERIA_RESULTS[num] = "PASS"
    elif report.skipped:
        _CRITERIA_RESULTS[num] = "SKIP"
    else:
        _CRITERIA_RESULTS[num] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA_LABELS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA_LABELS):
        outcome = _CRITERIA_RESULTS.get(num, "NOT RUN")
        terminalreporter.write_line(f"criterion {num:2d}: {outcome}  {_CRITERIA_LABELS[num]}")


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # pay JIT compilation and first-import costs once, before anything
    # that asserts on wall-clock time runs
    warm_up()
    cov = CovarianceModel.from_correlation(np.eye(2))
    solve_newton(cov, RiskBudgets.uniform(2))
    solve_jacobi(cov, RiskBudgets.uniform(2))
