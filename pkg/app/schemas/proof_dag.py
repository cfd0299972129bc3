"""Client-layer validation schemas."""

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field


class ValidationReason(StrEnum):
    """Why a contribution was judged invalid."""

    UNRESOLVED_IMPORT = "UNRESOLVED_IMPORT"
    CYCLIC_IMPORT = "CYCLIC_IMPORT"
    UNKNOWN_TARGET = "UNKNOWN_TARGET"
    STATEMENT_EXISTS = "STATEMENT_EXISTS"
    RESERVED_TARGET = "RESERVED_TARGET"
    INCONSISTENT_KIND = "INCONSISTENT_KIND"
    SELF_SUPPORT = "SELF_SUPPORT"
    BAD_PREMISE_ID = "BAD_PREMISE_ID"
    DUPLICATE_CONTENT = "DUPLICATE_CONTENT"


class ValidationResult(BaseModel):
    """Valid, or Invalid with the reasons found (in check order, no repeats)."""

    model_config = ConfigDict(frozen=True)

    reasons: tuple[ValidationReason, ...] = Field(default=())

    @property
    def valid(self) -> bool:
        return not self.reasons

    def __str__(self) -> str:
        return "Valid" if self.valid else f"Invalid({', '.join(self.reasons)})"
