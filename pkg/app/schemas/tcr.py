"""Token-curated registry schemas."""

from enum import StrEnum
from fractions import Fraction

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ListingState(StrEnum):
    """Lifecycle of a record in the canonical registry."""

    PENDING = "Pending"
    CHALLENGED = "Challenged"
    LISTED = "Listed"
    REJECTED = "Rejected"


class VoteChoice(StrEnum):
    """Ballot options in a challenge."""

    INCLUDE = "include"
    EXCLUDE = "exclude"


class TcrParams(BaseModel):
    """Stakes and periods governing the registry."""

    model_config = ConfigDict(frozen=True)

    min_bond: int = Field(..., gt=0, description="Minimum bond for voting/challenge rights")
    inclusion_stake: int = Field(..., gt=0, description="Stake attached to a proposal")
    dispute_stake: int = Field(..., gt=0, description="Stake posted by a challenger")
    delay_period: int = Field(..., gt=0, description="Ticks a proposal stays challengeable")
    vote_period: int = Field(..., gt=0, description="Ticks a vote stays open")
    challenger_share_num: int = Field(1, ge=0)
    challenger_share_denom: int = Field(2, gt=0)

    @model_validator(mode="after")
    def validate_share(self) -> "TcrParams":
        """Challenger share must lie in [0, 1]."""
        if self.challenger_share_num > self.challenger_share_denom:
            raise ValueError("challenger share must not exceed 1")
        return self

    @property
    def challenger_share(self) -> Fraction:
        """Challenger share as an exact fraction."""
        return Fraction(self.challenger_share_num, self.challenger_share_denom)
