"""Common schemas and the error envelope used across the simulator."""

from typing import Any, NoReturn

from pydantic import BaseModel


class ErrorDetail(BaseModel):
    """Error detail structure."""

    code: str
    message: str
    details: dict[str, Any] | None = None


class ProtocolError(Exception):
    """A protocol operation was refused; state is left unchanged."""

    def __init__(
        self,
        code: str,
        message: str,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.details = details or {}

    def to_detail(self) -> ErrorDetail:
        """Render the error as its envelope model."""
        return ErrorDetail(code=self.code, message=self.message, details=self.details)


class ScenarioError(ProtocolError):
    """Scenario file unreadable or unparseable."""


class InvariantViolation(ProtocolError):
    """A global invariant (conservation, determinism) no longer holds."""


def raise_protocol_error(
    code: str,
    message: str,
    details: dict[str, Any] | None = None,
) -> NoReturn:
    """
    Raise a ProtocolError with standardized error format.

    Args:
        code: Machine-readable error code (e.g., "INSUFFICIENT_BALANCE")
        message: Human-readable error message
        details: Optional additional error context
    """
    raise ProtocolError(code=code, message=message, details=details)


class DivergenceDetected(InvariantViolation):
    """Replaying a log produced a different outcome than the one recorded."""
