"""Exception hierarchy shared by all riskbudgeting modules."""


class RiskBudgetingError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RiskBudgetingError, ValueError):
    """Malformed, inconsistent or unparseable input (wrong shape, bad file,
    non positive definite matrix, mismatched dimensions)."""


class DomainError(RiskBudgetingError, ValueError):
    """Input is structurally fine but outside the mathematical domain of the
    operation (e.g. nonpositive weights fed to a log barrier)."""


class NumericError(RiskBudgetingError, ArithmeticError):
    """Numeric breakdown inside an algorithm; the message carries a
    diagnostic of what went nonfinite or lost positive definiteness."""
