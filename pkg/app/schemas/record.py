"""Registry record and contribution schemas."""

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Filetype(StrEnum):
    """Closed set of record file types."""

    CONJECTURE = "Conjecture"
    PARTIAL_PROOF = "PartialProof"
    COMPLETED_PROOF = "CompletedProof"
    THEOREM = "Theorem"
    DEFINITION = "Definition"
    TACTIC = "Tactic"


class ContributionKind(StrEnum):
    """Kind declared inside a contribution blob."""

    CONJECTURE = "conjecture"
    PARTIAL = "partial"
    COMPLETE = "complete"
    TACTIC = "tactic"
    DEFINITION = "definition"


# Which record filetypes may carry each blob kind
KIND_FILETYPES: dict[ContributionKind, frozenset[Filetype]] = {
    ContributionKind.CONJECTURE: frozenset({Filetype.CONJECTURE}),
    ContributionKind.PARTIAL: frozenset({Filetype.PARTIAL_PROOF}),
    ContributionKind.COMPLETE: frozenset({Filetype.COMPLETED_PROOF, Filetype.THEOREM}),
    ContributionKind.TACTIC: frozenset({Filetype.TACTIC}),
    ContributionKind.DEFINITION: frozenset({Filetype.DEFINITION}),
}


class RightKind(StrEnum):
    """Licensing options an author may attach to a contribution."""

    FREE_TO_USE = "free_to_use"
    RESTRICTED_TO_USE = "restricted_to_use"
    PAY_TO_USE = "pay_to_use"


class RightToUse(BaseModel):
    """Per-contribution license."""

    model_config = ConfigDict(frozen=True)

    kind: RightKind = RightKind.FREE_TO_USE
    fee: int = 0
    beneficiary: str | None = None

    @model_validator(mode="after")
    def validate_fee(self) -> "RightToUse":
        """Pay-to-use needs a positive fee; other kinds carry none."""
        if self.kind == RightKind.PAY_TO_USE:
            if self.fee <= 0:
                raise ValueError("pay_to_use requires a positive fee")
        elif self.fee != 0:
            raise ValueError(f"{self.kind} carries no fee")
        return self


class Record(BaseModel):
    """An entry in the permissive on-chain registry."""

    model_config = ConfigDict(frozen=True)

    record_id: str = Field(..., min_length=1)
    author: str = Field(..., min_length=1)
    file: str = Field(..., min_length=1, description="Content address of the blob")
    coq_ver: str = Field(..., min_length=1)
    filetype: Filetype
    imports: tuple[str, ...] = ()
    right_to_use: RightToUse = RightToUse()
    submitted_at: int = Field(..., ge=0)


class Contribution(BaseModel):
    """Parsed declarative contribution blob."""

    model_config = ConfigDict(frozen=True)

    target: str
    kind: ContributionKind
    premises: tuple[str, ...] = ()
    signature: str | None = None
    imports: tuple[str, ...] = ()

    @field_validator("target")
    @classmethod
    def validate_target(cls, v: str) -> str:
        """Target cannot be blank."""
        if not v.strip():
            raise ValueError("target cannot be empty")
        return v.strip()


# Filetype stamped on records whose scenario line does not name one
DEFAULT_FILETYPES: dict[ContributionKind, Filetype] = {
    ContributionKind.CONJECTURE: Filetype.CONJECTURE,
    ContributionKind.PARTIAL: Filetype.PARTIAL_PROOF,
    ContributionKind.COMPLETE: Filetype.THEOREM,
    ContributionKind.TACTIC: Filetype.TACTIC,
    ContributionKind.DEFINITION: Filetype.DEFINITION,
}


class SubmissionResult(BaseModel):
    """What the client layer made of a submitted record."""

    model_config = ConfigDict(frozen=True)

    record_id: str
    address: str
    ingested: bool
    detail: str
    fees_paid: int = 0
