"""Content store and permissive record registry."""

from pydantic import BaseModel, Field

from app.schemas.record import Record


class ContentStore(BaseModel):
    """Blobs keyed by content address, each with a hosted flag."""

    blobs: dict[str, bytes] = Field(default_factory=dict)
    hosted: dict[str, bool] = Field(default_factory=dict)


class Registry(BaseModel):
    """Append-only list of submitted records."""

    records: list[Record] = Field(default_factory=list)
