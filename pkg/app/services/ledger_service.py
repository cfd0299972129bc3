"""Token ledger service: genesis, transfers, escrows and conservation."""

import logging
from collections.abc import Sequence

from app.models.ledger import Escrow, Ledger
from app.schemas.common import InvariantViolation, raise_protocol_error

logger = logging.getLogger(__name__)


def genesis(allocations: Sequence[tuple[str, int]]) -> Ledger:
    """
    Create a ledger from initial allocations.

    This is the only operation that creates supply.

    Args:
        allocations: (account, amount) pairs with distinct accounts

    Returns:
        New ledger whose total supply is the sum of allocations

    Raises:
        ProtocolError: DUPLICATE_ACCOUNT, INVALID_ACCOUNT or INVALID_AMOUNT
    """
    balances: dict[str, int] = {}
    for account, amount in allocations:
        if not account:
            raise_protocol_error("INVALID_ACCOUNT", "Account id cannot be empty")
        if account in balances:
            raise_protocol_error(
                code="DUPLICATE_ACCOUNT",
                message=f"Account {account} allocated twice at genesis",
                details={"account": account},
            )
        _require_amount(amount)
        balances[account] = amount

    ledger = Ledger(balances=balances, total_supply=sum(balances.values()))
    logger.info(f"Genesis: {len(balances)} accounts, total supply {ledger.total_supply}")
    return ledger


def balance_of(ledger: Ledger, account: str) -> int:
    """Current free balance of an account."""
    _require_account(ledger, account)
    return ledger.balances[account]


def transfer(ledger: Ledger, sender: str, recipient: str, amount: int) -> Ledger:
    """
    Move tokens between two accounts.

    Args:
        ledger: Ledger to mutate
        sender: Debited account
        recipient: Credited account
        amount: Token units to move

    Returns:
        The same ledger, mutated

    Raises:
        ProtocolError: UNKNOWN_ACCOUNT, INVALID_AMOUNT or INSUFFICIENT_BALANCE
    """
    _require_account(ledger, sender)
    _require_account(ledger, recipient)
    _require_amount(amount)
    _require_funds(ledger, sender, amount)

    ledger.balances[sender] -= amount
    ledger.balances[recipient] += amount
    logger.debug(f"Transfer {amount} from {sender} to {recipient}")
    return ledger


def escrow_lock(ledger: Ledger, owner: str, amount: int, purpose: str = "") -> str:
    """
    Lock tokens from an account into a new escrow.

    Args:
        ledger: Ledger to mutate
        owner: Account whose balance is locked
        amount: Token units to lock (zero is a valid empty escrow)
        purpose: Free-form label (e.g. "tcr:inclusion:ct00")

    Returns:
        Id of the new escrow

    Raises:
        ProtocolError: UNKNOWN_ACCOUNT, INVALID_AMOUNT or INSUFFICIENT_BALANCE
    """
    _require_account(ledger, owner)
    _require_amount(amount)
    _require_funds(ledger, owner, amount)

    ledger.next_escrow_seq += 1
    escrow_id = f"escrow-{ledger.next_escrow_seq:04d}"
    ledger.balances[owner] -= amount
    ledger.escrows[escrow_id] = Escrow(
        escrow_id=escrow_id, owner=owner, purpose=purpose, amount=amount
    )
    logger.debug(f"Locked {amount} from {owner} into {escrow_id} ({purpose})")
    return escrow_id


def escrow_amount(ledger: Ledger, escrow_id: str) -> int:
    """Tokens currently held by an escrow."""
    return _require_escrow(ledger, escrow_id).amount


def escrow_disburse(
    ledger: Ledger,
    escrow_id: str,
    payouts: Sequence[tuple[str, int]],
) -> Ledger:
    """
    Pay part of a live escrow; the escrow stays open with the rest.

    Raises:
        ProtocolError: UNKNOWN_ESCROW, UNKNOWN_ACCOUNT or PAYOUT_MISMATCH
    """
    escrow = _require_escrow(ledger, escrow_id)
    total = _validate_payouts(ledger, payouts)
    if total > escrow.amount:
        raise_protocol_error(
            code="PAYOUT_MISMATCH",
            message=f"Payouts of {total} exceed escrow {escrow_id} holding {escrow.amount}",
            details={"escrow_id": escrow_id, "escrowed": escrow.amount, "requested": total},
        )

    for account, amount in payouts:
        ledger.balances[account] += amount
    escrow.amount -= total
    return ledger


def escrow_release(
    ledger: Ledger,
    escrow_id: str,
    payouts: Sequence[tuple[str, int]],
) -> Ledger:
    """
    Close an escrow by paying out exactly its amount.

    All-or-nothing: on error the ledger is untouched.

    Args:
        ledger: Ledger to mutate
        escrow_id: Escrow to close
        payouts: (account, amount) pairs summing exactly to the escrowed amount

    Returns:
        The same ledger, mutated

    Raises:
        ProtocolError: UNKNOWN_ESCROW, UNKNOWN_ACCOUNT or PAYOUT_MISMATCH
    """
    escrow = _require_escrow(ledger, escrow_id)
    total = _validate_payouts(ledger, payouts)
    if total != escrow.amount:
        raise_protocol_error(
            code="PAYOUT_MISMATCH",
            message=f"Payouts of {total} do not match escrow {escrow_id} holding {escrow.amount}",
            details={"escrow_id": escrow_id, "escrowed": escrow.amount, "requested": total},
        )

    for account, amount in payouts:
        ledger.balances[account] += amount
    del ledger.escrows[escrow_id]
    logger.debug(f"Released {escrow_id} ({escrow.purpose}) to {len(payouts)} payees")
    return ledger


def total_escrowed(ledger: Ledger) -> int:
    return sum(e.amount for e in ledger.escrows.values())


def check_conservation(ledger: Ledger) -> None:
    """
    Assert balances plus escrows equal the total supply.

    Raises:
        InvariantViolation: If tokens were created or destroyed
    """
    if any(b < 0 for b in ledger.balances.values()):
        raise InvariantViolation(
            code="NEGATIVE_BALANCE",
            message="A balance went negative",
            details={"balances": dict(ledger.balances)},
        )
    held = sum(ledger.balances.values()) + total_escrowed(ledger)
    if held != ledger.total_supply:
        logger.error(f"Conservation broken: held {held} != supply {ledger.total_supply}")
        raise InvariantViolation(
            code="CONSERVATION_VIOLATED",
            message=f"Balances and escrows hold {held}, total supply is {ledger.total_supply}",
            details={"held": held, "total_supply": ledger.total_supply},
        )


def _require_account(ledger: Ledger, account: str) -> None:
    if account not in ledger.balances:
        raise_protocol_error(
            code="UNKNOWN_ACCOUNT",
            message=f"Account {account!r} does not exist",
            details={"account": account},
        )


def _require_amount(amount: int) -> None:
    if not isinstance(amount, int) or amount < 0:
        raise_protocol_error(
            code="INVALID_AMOUNT",
            message=f"Token amounts are non-negative integers, got {amount!r}",
        )


def _require_funds(ledger: Ledger, account: str, amount: int) -> None:
    balance = ledger.balances[account]
    if balance < amount:
        raise_protocol_error(
            code="INSUFFICIENT_BALANCE",
            message=f"{account} holds {balance}, needs {amount}",
            details={"account": account, "balance": balance, "required": amount},
        )


def _require_escrow(ledger: Ledger, escrow_id: str) -> Escrow:
    escrow = ledger.escrows.get(escrow_id)
    if escrow is None:
        raise_protocol_error(
            code="UNKNOWN_ESCROW",
            message=f"Escrow {escrow_id} does not exist",
            details={"escrow_id": escrow_id},
        )
    return escrow


def _validate_payouts(ledger: Ledger, payouts: Sequence[tuple[str, int]]) -> int:
    for account, amount in payouts:
        _require_account(ledger, account)
        _require_amount(amount)
    return sum(amount for _, amount in payouts)
