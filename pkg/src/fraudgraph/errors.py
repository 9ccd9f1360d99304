"""Exception types shared across the toolkit."""


class FraudGraphError(Exception):
    """Base class for all toolkit errors."""


class ParseError(FraudGraphError):
    """Malformed input row. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(FraudGraphError):
    """Input violates a structural rule (node/edge typing, shapes)."""


class UsageError(FraudGraphError):
    """Caller broke an operation's precondition."""


class DataError(FraudGraphError):
    """Referenced data is missing or inconsistent (names the offender)."""


class ContractError(FraudGraphError):
    """Input state violates a documented operation contract."""
