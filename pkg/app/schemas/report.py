"""Run report schemas (serialized field order is the declaration order)."""

from pydantic import BaseModel, Field


class ListingReport(BaseModel):
    record_id: str
    state: str
    weight: int


class TreePayoutReport(BaseModel):
    mechanism: str
    account: str
    amount: int
    role: str


class TreeReport(BaseModel):
    justifications: list[str]
    contributors: list[str]
    payouts: list[TreePayoutReport] = Field(default_factory=list)


class ProofReport(BaseModel):
    target: str
    proven: bool
    trees: list[TreeReport] = Field(default_factory=list)


class MechanismReport(BaseModel):
    mechanism_id: str
    kind: str
    target: str | None = None
    status: str
    paid_out: int


class LicenseReport(BaseModel):
    record_id: str
    importer: str
    beneficiary: str
    fee: int
    tick: int


class TcrParamsReport(BaseModel):
    min_bond: int
    inclusion_stake: int
    dispute_stake: int
    delay_period: int
    vote_period: int
    challenger_share: str


class RunReport(BaseModel):
    """Deterministic summary of a finished run."""

    scenario: str
    final_tick: int
    event_count: int
    total_supply: int
    escrowed: int
    tcr_params: TcrParamsReport
    balances: dict[str, int]
    listings: list[ListingReport] = Field(default_factory=list)
    proofs: list[ProofReport] = Field(default_factory=list)
    mechanisms: list[MechanismReport] = Field(default_factory=list)
    licensing: list[LicenseReport] = Field(default_factory=list)
    duplicates: dict[str, str] = Field(default_factory=dict)
