"""Client layer: what a prover's node does around a registry submission."""

import logging

from app.config import settings
from app.models.world import World
from app.schemas.common import ProtocolError, raise_protocol_error
from app.schemas.incentive import LicenseOutcome
from app.schemas.record import (
    DEFAULT_FILETYPES,
    Contribution,
    Filetype,
    RightToUse,
    SubmissionResult,
)
from app.services import (
    content_store,
    license_service,
    proof_dag_service,
    registry_service,
    tcr_service,
)
from app.utils.blob_parser import parse_contribution

logger = logging.getLogger(__name__)


def publish(world: World, label: str, blob: bytes | str) -> str:
    """Store a blob and remember its address under a scenario label."""
    address = content_store.put(world.store, blob)
    world.labels[label] = address
    return address


def resolve_address(world: World, label_or_address: str) -> str:
    """A label's address, or the argument itself when it is not a label."""
    return world.labels.get(label_or_address.lstrip("@"), label_or_address)


def submit(
    world: World,
    author: str,
    record_id: str,
    address: str,
    filetype: Filetype | str | None = None,
    right_to_use: RightToUse | None = None,
    coq_ver: str | None = None,
) -> SubmissionResult:
    """
    Submit a record and run the client-layer checks on its content.

    The registry accepts any well-formed record. The blob is then fetched,
    parsed, validated and licensed; the contribution enters the statement
    graph only if every step passes, and the result says which one failed.

    Args:
        world: World state
        author: Submitting account
        record_id: New record id
        address: Content address of the blob
        filetype: Record filetype (defaults from the blob's kind)
        right_to_use: License attached to the record
        coq_ver: Proof assistant version (defaults to settings.COQ_VERSION)

    Returns:
        Submission result

    Raises:
        ProtocolError: MALFORMED_RECORD or DUPLICATE_RECORD (nothing recorded)
    """
    contribution: Contribution | None = None
    failure: ProtocolError | None = None
    try:
        contribution = parse_contribution(content_store.get(world.store, address))
    except ProtocolError as e:
        failure = e

    if filetype is None:
        filetype = DEFAULT_FILETYPES[contribution.kind] if contribution else Filetype.THEOREM
    record = registry_service.build_record(
        record_id=record_id,
        author=author,
        file=address,
        coq_ver=coq_ver or settings.COQ_VERSION,
        filetype=filetype,
        imports=contribution.imports if contribution else (),
        right_to_use=right_to_use or RightToUse(),
        submitted_at=world.tick,
    )
    registry_service.submit_record(world.registry, record)

    def result(ingested: bool, detail: str, fees: int = 0) -> SubmissionResult:
        return SubmissionResult(
            record_id=record_id, address=address, ingested=ingested, detail=detail, fees_paid=fees
        )

    if contribution is None:
        logger.warning(f"Record {record_id} accepted but not ingested: {failure.code}")
        return result(False, f"recorded; not ingested: {failure.code}")

    validation = proof_dag_service.validate(world.dag, world.store, record, contribution)
    if not validation.valid:
        logger.warning(f"Record {record_id} accepted but invalid: {validation}")
        return result(False, f"recorded; invalid: {', '.join(validation.reasons)}")

    imports = proof_dag_service.import_list(record, contribution)
    decisions = license_service.license_imports(
        world.licenses, world.ledger, world.registry, author, imports, world.tick
    )
    denied = [d for d in decisions if not d.permits_use]
    if denied:
        return result(False, f"recorded; license denied: {denied[0].reason}")

    proof_dag_service.ingest(
        world.dag,
        world.store,
        record,
        contribution,
        ai_authored=author in world.ai_accounts,
    )
    fees = sum(d.fee for d in decisions if d.outcome == LicenseOutcome.CHARGED)
    detail = "ingested"
    if fees:
        detail += f"; license fees {fees}"
    if contribution.target in world.dag.duplicates:
        detail += f"; duplicates {world.dag.duplicates[contribution.target]}"
    return result(True, detail, fees)


def bootstrap(
    world: World,
    author: str,
    record_id: str,
    blob: str,
    filetype: Filetype | str | None = None,
) -> SubmissionResult:
    """
    Add a library contribution that is ingested as an axiom and pre-listed.

    Raises:
        ProtocolError: PARSE_ERROR, INVALID_CONTRIBUTION, MALFORMED_RECORD or DUPLICATE_RECORD
    """
    contribution = parse_contribution(blob)
    address = content_store.address_of(blob)
    record = registry_service.build_record(
        record_id=record_id,
        author=author,
        file=address,
        coq_ver=settings.COQ_VERSION,
        filetype=filetype or DEFAULT_FILETYPES[contribution.kind],
        imports=contribution.imports,
        submitted_at=world.tick,
    )
    validation = proof_dag_service.validate(world.dag, world.store, record, contribution)
    if not validation.valid:
        raise_protocol_error(
            code="INVALID_CONTRIBUTION",
            message=f"Library record {record_id} is {validation}",
            details={"record_id": record_id, "reasons": list(validation.reasons)},
        )
    registry_service.submit_record(world.registry, record)
    publish(world, record_id, blob)
    proof_dag_service.ingest(world.dag, world.store, record, contribution, axiom=True)
    tcr_service.prelist(world.tcr, record_id, author, world.tick)
    return SubmissionResult(record_id=record_id, address=address, ingested=True, detail="listed")
