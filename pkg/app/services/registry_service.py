"""Permissive on-chain registry of contribution records."""

import logging
from typing import Any

from pydantic import ValidationError

from app.models.registry import Registry
from app.schemas.common import raise_protocol_error
from app.schemas.record import Filetype, Record

logger = logging.getLogger(__name__)


def build_record(**fields: Any) -> Record:
    """
    Construct a record, translating schema failures to MALFORMED_RECORD.

    Raises:
        ProtocolError: MALFORMED_RECORD on a missing field or unknown filetype
    """
    try:
        return Record(**fields)
    except ValidationError as e:
        problems = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise_protocol_error(
            code="MALFORMED_RECORD",
            message="Record is not well formed",
            details={"problems": problems},
        )


def submit_record(registry: Registry, record: Record) -> str:
    """
    Append a record. No semantic checks: duplicates and invalid content are accepted.

    Args:
        registry: Registry to mutate
        record: Well-formed record

    Returns:
        The record id

    Raises:
        ProtocolError: DUPLICATE_RECORD if the id is already taken
    """
    if get_record(registry, record.record_id) is not None:
        raise_protocol_error(
            code="DUPLICATE_RECORD",
            message=f"Record id {record.record_id} already exists",
            details={"record_id": record.record_id},
        )
    registry.records.append(record)
    logger.info(
        f"Record {record.record_id} submitted by {record.author} "
        f"(filetype={record.filetype}, tick={record.submitted_at})"
    )
    return record.record_id


def list_records(
    registry: Registry,
    filetype: Filetype | str | None = None,
    author: str | None = None,
) -> list[Record]:
    """
    List records in registry order, optionally filtered.

    Order is logical time, then insertion index.
    """
    indexed = sorted(enumerate(registry.records), key=lambda pair: (pair[1].submitted_at, pair[0]))
    records = [record for _, record in indexed]
    if filetype is not None:
        records = [r for r in records if r.filetype == Filetype(filetype)]
    if author is not None:
        records = [r for r in records if r.author == author]
    return records


def get_record(registry: Registry, record_id: str) -> Record | None:
    for record in registry.records:
        if record.record_id == record_id:
            return record
    return None


def find_records_by_file(registry: Registry, address: str) -> list[Record]:
    """Records pointing at a content address, earliest first."""
    return [r for r in list_records(registry) if r.file == address]
