"""Incentive contract state and licensing ledger."""

from fractions import Fraction
from typing import Annotated, Literal

from pydantic import BaseModel, Field

from app.models.proof_dag import ProofTree
from app.schemas.incentive import AllocationPolicy


class AwardPayout(BaseModel):
    """One credit produced by an award."""

    account: str
    amount: int
    role: Literal["contributor", "staker"] = "contributor"


class Award(BaseModel):
    """A mechanism paying out for one proof tree."""

    mechanism_id: str
    tree_key: str
    tick: int
    amount: int
    payouts: list[AwardPayout] = Field(default_factory=list)


class FixedPrize(BaseModel):
    """Single prize released once enough signers approve a winning tree."""

    kind: Literal["fixed"] = "fixed"
    mechanism_id: str
    deployer: str
    target: str
    prize: int
    escrow_id: str
    signers: tuple[str, ...]
    threshold: int
    policy: AllocationPolicy = AllocationPolicy()
    approvals: dict[str, list[str]] = Field(default_factory=dict)
    winner: ProofTree | None = None
    paid: bool = False
    awards: list[Award] = Field(default_factory=list)


class HalvingSeries(BaseModel):
    """Prize schedule R, R/2, R/4, ... for successive distinct proofs."""

    kind: Literal["halving"] = "halving"
    mechanism_id: str
    deployer: str
    target: str
    base_prize: int
    escrow_id: str
    policy: AllocationPolicy = AllocationPolicy()
    proofs_paid: int = 0
    registered: list[str] = Field(default_factory=list)
    closed: bool = False
    awards: list[Award] = Field(default_factory=list)

    @property
    def next_payment(self) -> int:
        return self.base_prize >> self.proofs_paid


class StakeEntry(BaseModel):
    """Tokens one account locked on a branch."""

    staker: str
    amount: int
    escrow_id: str


class BranchStake(BaseModel):
    """Stakes on a partial-progress contribution sharing in later rewards."""

    kind: Literal["branch"] = "branch"
    mechanism_id: str
    deployer: str
    parent: str
    contribution: str
    rho_num: int
    rho_denom: int
    stakes: list[StakeEntry] = Field(default_factory=list)
    status: Literal["live", "settled", "refunded"] = "live"
    paid_out: int = 0

    @property
    def rho(self) -> Fraction:
        return Fraction(self.rho_num, self.rho_denom)


Mechanism = Annotated[FixedPrize | HalvingSeries | BranchStake, Field(discriminator="kind")]


class LicenseCharge(BaseModel):
    """A fee paid to use a pay-to-use contribution."""

    record_id: str
    contribution: str
    importer: str
    beneficiary: str
    fee: int
    tick: int


class LicenseState(BaseModel):
    """Which importers already paid for which contributions."""

    paid: set[tuple[str, str]] = Field(default_factory=set)
    charges: list[LicenseCharge] = Field(default_factory=list)
