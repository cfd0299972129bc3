"""Incentive layer schemas."""

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field


class PolicyKind(StrEnum):
    """How an awarded amount is divided among contributors."""

    SHAPLEY = "shapley"
    EQUAL_SPLIT = "equal"


class PolicyScope(StrEnum):
    """Which justifications define the players of an allocation."""

    TREE = "tree"
    GRAPH = "graph"


class AllocationPolicy(BaseModel):
    """Allocation rule attached to a mechanism."""

    model_config = ConfigDict(frozen=True)

    kind: PolicyKind = PolicyKind.SHAPLEY
    scope: PolicyScope = PolicyScope.TREE


class Payout(BaseModel):
    """Tokens credited to one account."""

    model_config = ConfigDict(frozen=True)

    account: str
    amount: int = Field(..., ge=0)


class LicenseOutcome(StrEnum):
    """Result of a right-to-use check."""

    ALLOWED = "Allowed"
    DENIED = "Denied"
    CHARGED = "Charged"


class LicenseDecision(BaseModel):
    """Decision for one (importer, contribution) use."""

    model_config = ConfigDict(frozen=True)

    outcome: LicenseOutcome
    fee: int = 0
    reason: str | None = None

    @property
    def permits_use(self) -> bool:
        return self.outcome != LicenseOutcome.DENIED
