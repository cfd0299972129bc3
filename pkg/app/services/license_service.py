"""Right-to-use checks and pay-to-use fee collection."""

import logging
from collections.abc import Sequence

from app.models.incentive import LicenseCharge, LicenseState
from app.models.ledger import Ledger
from app.models.registry import Registry
from app.schemas.common import ProtocolError
from app.schemas.incentive import LicenseDecision, LicenseOutcome
from app.schemas.record import Record, RightKind
from app.services import ledger_service, registry_service

logger = logging.getLogger(__name__)


def governing_record(registry: Registry, address: str) -> Record | None:
    """Earliest record filed for a content address; its rights govern use."""
    records = registry_service.find_records_by_file(registry, address)
    return records[0] if records else None


def beneficiary_of(record: Record) -> str:
    return record.right_to_use.beneficiary or record.author


def check_and_charge_license(
    licenses: LicenseState,
    ledger: Ledger,
    registry: Registry,
    importer: str,
    address: str,
    now: int,
) -> LicenseDecision:
    """
    Decide whether an account may use a contribution, charging the fee if due.

    Args:
        licenses: Paid-use ledger to update
        ledger: Token ledger the fee moves on
        registry: Registry holding the contribution's record
        importer: Account using the contribution
        address: Content address being imported
        now: Current tick

    Returns:
        Allowed (free, already paid or own work), Denied (restricted or unpaid)
        or Charged(fee)
    """
    record = governing_record(registry, address)
    if record is None:
        return LicenseDecision(outcome=LicenseOutcome.ALLOWED, reason="unregistered")

    right = record.right_to_use
    if right.kind == RightKind.FREE_TO_USE:
        return LicenseDecision(outcome=LicenseOutcome.ALLOWED)
    if right.kind == RightKind.RESTRICTED_TO_USE:
        logger.warning(f"{importer} denied use of restricted record {record.record_id}")
        return LicenseDecision(outcome=LicenseOutcome.DENIED, reason="Restricted")
    if (address, importer) in licenses.paid:
        return LicenseDecision(outcome=LicenseOutcome.ALLOWED, reason="already paid")

    beneficiary = beneficiary_of(record)
    if beneficiary == importer:
        return LicenseDecision(outcome=LicenseOutcome.ALLOWED, reason="own work")
    try:
        ledger_service.transfer(ledger, importer, beneficiary, right.fee)
    except ProtocolError as e:
        if e.code not in ("INSUFFICIENT_BALANCE", "UNKNOWN_ACCOUNT"):
            raise
        logger.warning(f"{importer} cannot pay {right.fee} for {record.record_id}: {e.code}")
        return LicenseDecision(outcome=LicenseOutcome.DENIED, fee=right.fee, reason="Unpaid")

    licenses.paid.add((address, importer))
    licenses.charges.append(
        LicenseCharge(
            record_id=record.record_id,
            contribution=address,
            importer=importer,
            beneficiary=beneficiary,
            fee=right.fee,
            tick=now,
        )
    )
    logger.info(f"{importer} paid {right.fee} to {beneficiary} to use {record.record_id}")
    return LicenseDecision(outcome=LicenseOutcome.CHARGED, fee=right.fee)


def license_imports(
    licenses: LicenseState,
    ledger: Ledger,
    registry: Registry,
    importer: str,
    addresses: Sequence[str],
    now: int,
) -> list[LicenseDecision]:
    """
    License every import of a contribution, all or nothing.

    Restrictions and the importer's ability to pay every outstanding fee are
    checked before anything is charged, so a denial leaves the ledger as it was.

    Returns:
        One decision per address; any Denied means the contribution may not be used
    """
    outstanding = 0
    decisions: dict[str, LicenseDecision] = {}
    for address in addresses:
        record = governing_record(registry, address)
        if record is None:
            continue
        right = record.right_to_use
        if right.kind == RightKind.RESTRICTED_TO_USE:
            decisions[address] = LicenseDecision(outcome=LicenseOutcome.DENIED, reason="Restricted")
        elif right.kind == RightKind.PAY_TO_USE and (address, importer) not in licenses.paid:
            if beneficiary_of(record) != importer:
                outstanding += right.fee

    if decisions:
        logger.warning(f"{importer} imports restricted content; nothing charged")
        return [
            decisions.get(a, LicenseDecision(outcome=LicenseOutcome.ALLOWED)) for a in addresses
        ]

    balance = ledger.balances.get(importer, 0)
    if outstanding > balance:
        logger.warning(f"{importer} holds {balance}, owes {outstanding} in license fees")
        return [
            LicenseDecision(outcome=LicenseOutcome.DENIED, fee=outstanding, reason="Unpaid")
            for _ in addresses
        ]

    return [
        check_and_charge_license(licenses, ledger, registry, importer, address, now)
        for address in addresses
    ]
