"""AND-OR statement graph models."""

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field

TRUE_STATEMENT = "True"


class StatementStatus(StrEnum):
    """Whether a statement is closed down to axioms."""

    OPEN = "Open"
    PROVEN = "Proven"


class Justification(BaseModel):
    """One contribution's reduction of a target to a set of premises."""

    model_config = ConfigDict(frozen=True)

    id: str
    target: str
    premises: tuple[str, ...] = ()
    contribution: str
    author: str
    seq: int
    ai_authored: bool = False
    axiom: bool = False


class ProofDag(BaseModel):
    """Statements, justifications and the indexes derived from ingestion."""

    statements: dict[str, StatementStatus] = Field(
        default_factory=lambda: {TRUE_STATEMENT: StatementStatus.PROVEN}
    )
    justifications: dict[str, Justification] = Field(default_factory=dict)
    signature_index: dict[str, str] = Field(default_factory=dict)
    duplicates: dict[str, str] = Field(default_factory=dict)
    introduced_by: dict[str, str] = Field(default_factory=dict)
    imports: dict[str, tuple[str, ...]] = Field(default_factory=dict)
    conjectures: list[str] = Field(default_factory=list)

    def justifications_for(self, statement: str) -> list[Justification]:
        """Justifications targeting a statement, in insertion order."""
        return [j for j in self.justifications.values() if j.target == statement]

    def __repr__(self) -> str:
        return (
            f"<ProofDag(statements={len(self.statements)}, "
            f"justifications={len(self.justifications)})>"
        )


class ProofTree(BaseModel):
    """One distinct completed proof: a chosen justification per covered statement."""

    model_config = ConfigDict(frozen=True)

    root: str
    choices: dict[str, str] = Field(default_factory=dict)
    contributors: tuple[str, ...] = ()

    @property
    def justification_ids(self) -> frozenset[str]:
        return frozenset(self.choices.values())

    @property
    def key(self) -> str:
        """Stable identity of the tree (sorted justification ids)."""
        return "+".join(sorted(self.choices.values()))
