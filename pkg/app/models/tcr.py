"""Token-curated registry state."""

from pydantic import BaseModel, Field

from app.schemas.tcr import ListingState, TcrParams, VoteChoice


class Bond(BaseModel):
    """A bonded prover's locked stake."""

    prover: str
    escrow_id: str
    amount: int


class Challenge(BaseModel):
    """An open or resolved dispute over a pending listing."""

    challenger: str
    dispute_escrow: str
    votes: dict[str, VoteChoice] = Field(default_factory=dict)
    vote_deadline: int


class TcrListing(BaseModel):
    """Lifecycle state of one record in the canonical registry."""

    record_id: str
    proposer: str
    state: ListingState = ListingState.PENDING
    inclusion_escrow: str | None = None
    proposed_at: int
    deadline: int
    challenge: Challenge | None = None
    listed_at: int | None = None
    weight: int = 0

    def __repr__(self) -> str:
        return f"<TcrListing(record={self.record_id}, state={self.state}, weight={self.weight})>"


class TcrState(BaseModel):
    """Parameters, bonds and listings of the registry contract."""

    params: TcrParams
    bonds: dict[str, Bond] = Field(default_factory=dict)
    listings: dict[str, TcrListing] = Field(default_factory=dict)
