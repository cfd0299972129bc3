"""Ledger model for token balances and escrows."""

from pydantic import BaseModel, Field


class Escrow(BaseModel):
    """Tokens locked on behalf of an account for a protocol purpose."""

    escrow_id: str
    owner: str
    purpose: str = ""
    amount: int = Field(..., ge=0)


class Ledger(BaseModel):
    """Balances, live escrows and the fixed total supply."""

    balances: dict[str, int] = Field(default_factory=dict)
    escrows: dict[str, Escrow] = Field(default_factory=dict)
    total_supply: int = 0
    next_escrow_seq: int = 0

    def __repr__(self) -> str:
        return (
            f"<Ledger(accounts={len(self.balances)}, escrows={len(self.escrows)}, "
            f"supply={self.total_supply})>"
        )
