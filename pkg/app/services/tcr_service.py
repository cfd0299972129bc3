"""Token-curated registry: bonding, proposals, challenges, votes and payouts."""

import logging

from app.models.ledger import Ledger
from app.models.registry import Registry
from app.models.tcr import Bond, Challenge, TcrListing, TcrState
from app.schemas.common import raise_protocol_error
from app.schemas.incentive import Payout
from app.schemas.tcr import ListingState, VoteChoice
from app.services import ledger_service, registry_service
from app.utils.rounding import equal_split, floor_fraction

logger = logging.getLogger(__name__)

TERMINAL_STATES = frozenset({ListingState.LISTED, ListingState.REJECTED})


def bond(tcr: TcrState, ledger: Ledger, prover: str, amount: int) -> Bond:
    """
    Lock a stake and become a bonded prover.

    Args:
        tcr: Registry state
        ledger: Ledger to lock the stake from
        prover: Account bonding
        amount: Stake, at least params.min_bond

    Returns:
        The new bond

    Raises:
        ProtocolError: BELOW_MIN_BOND, ALREADY_BONDED or INSUFFICIENT_BALANCE
    """
    if amount < tcr.params.min_bond:
        raise_protocol_error(
            code="BELOW_MIN_BOND",
            message=f"Bond of {amount} is below the minimum {tcr.params.min_bond}",
            details={"prover": prover, "amount": amount, "min_bond": tcr.params.min_bond},
        )
    if prover in tcr.bonds:
        raise_protocol_error(
            code="ALREADY_BONDED",
            message=f"{prover} is already bonded",
            details={"prover": prover},
        )

    escrow_id = ledger_service.escrow_lock(ledger, prover, amount, purpose=f"tcr:bond:{prover}")
    tcr.bonds[prover] = Bond(prover=prover, escrow_id=escrow_id, amount=amount)
    logger.info(f"{prover} bonded {amount}")
    return tcr.bonds[prover]


def is_bonded(tcr: TcrState, account: str) -> bool:
    return account in tcr.bonds


def get_listing(tcr: TcrState, record_id: str) -> TcrListing:
    """
    Raises:
        ProtocolError: UNKNOWN_LISTING
    """
    listing = tcr.listings.get(record_id)
    if listing is None:
        raise_protocol_error(
            code="UNKNOWN_LISTING",
            message=f"Record {record_id} was never proposed",
            details={"record_id": record_id},
        )
    return listing


def propose(
    tcr: TcrState,
    ledger: Ledger,
    registry: Registry,
    record_id: str,
    proposer: str,
    now: int,
) -> TcrListing:
    """
    Propose a record for the canonical registry, escrowing the inclusion stake.

    Raises:
        ProtocolError: UNKNOWN_RECORD, ALREADY_PROPOSED or INSUFFICIENT_BALANCE
    """
    if registry_service.get_record(registry, record_id) is None:
        raise_protocol_error(
            code="UNKNOWN_RECORD",
            message=f"Record {record_id} is not in the registry",
            details={"record_id": record_id},
        )
    if record_id in tcr.listings:
        raise_protocol_error(
            code="ALREADY_PROPOSED",
            message=f"Record {record_id} was already proposed",
            details={"record_id": record_id},
        )

    escrow_id = ledger_service.escrow_lock(
        ledger, proposer, tcr.params.inclusion_stake, purpose=f"tcr:inclusion:{record_id}"
    )
    listing = TcrListing(
        record_id=record_id,
        proposer=proposer,
        inclusion_escrow=escrow_id,
        proposed_at=now,
        deadline=now + tcr.params.delay_period,
    )
    tcr.listings[record_id] = listing
    logger.info(f"Record {record_id} proposed by {proposer}, deadline {listing.deadline}")
    return listing


def prelist(tcr: TcrState, record_id: str, proposer: str, now: int) -> TcrListing:
    """List a bootstrap library record directly, with no stake."""
    if record_id in tcr.listings:
        raise_protocol_error(
            code="ALREADY_PROPOSED",
            message=f"Record {record_id} was already proposed",
            details={"record_id": record_id},
        )
    listing = TcrListing(
        record_id=record_id,
        proposer=proposer,
        state=ListingState.LISTED,
        proposed_at=now,
        deadline=now,
        listed_at=now,
    )
    tcr.listings[record_id] = listing
    logger.debug(f"Record {record_id} pre-listed")
    return listing


def challenge(
    tcr: TcrState,
    ledger: Ledger,
    record_id: str,
    challenger: str,
    now: int,
) -> TcrListing:
    """
    Dispute a pending listing by posting the dispute stake.

    Raises:
        ProtocolError: UNKNOWN_LISTING, NOT_PENDING, DEADLINE_PASSED,
            NOT_BONDED or INSUFFICIENT_BALANCE
    """
    listing = get_listing(tcr, record_id)
    if listing.state != ListingState.PENDING:
        raise_protocol_error(
            code="NOT_PENDING",
            message=f"Record {record_id} is {listing.state}, not Pending",
            details={"record_id": record_id, "state": listing.state},
        )
    if now >= listing.deadline:
        raise_protocol_error(
            code="DEADLINE_PASSED",
            message=f"Challenge window for {record_id} closed at tick {listing.deadline}",
            details={"record_id": record_id, "deadline": listing.deadline, "now": now},
        )
    _require_bonded(tcr, challenger)

    escrow_id = ledger_service.escrow_lock(
        ledger, challenger, tcr.params.dispute_stake, purpose=f"tcr:dispute:{record_id}"
    )
    listing.challenge = Challenge(
        challenger=challenger,
        dispute_escrow=escrow_id,
        vote_deadline=now + tcr.params.vote_period,
    )
    listing.state = ListingState.CHALLENGED
    logger.info(f"{challenger} challenged {record_id} (vote period {tcr.params.vote_period})")
    return listing


def vote(
    tcr: TcrState,
    record_id: str,
    voter: str,
    choice: VoteChoice | str,
    now: int,
) -> TcrListing:
    """
    Cast one immutable ballot in an open challenge.

    Raises:
        ProtocolError: UNKNOWN_LISTING, NOT_BONDED, NO_ACTIVE_VOTE or ALREADY_VOTED
    """
    listing = get_listing(tcr, record_id)
    _require_bonded(tcr, voter)
    if choice not in {c.value for c in VoteChoice}:
        raise_protocol_error(
            code="INVALID_CHOICE",
            message=f"Vote must be include or exclude, got {choice!r}",
            details={"choice": str(choice)},
        )
    dispute = listing.challenge
    if listing.state != ListingState.CHALLENGED or dispute is None or now >= dispute.vote_deadline:
        raise_protocol_error(
            code="NO_ACTIVE_VOTE",
            message=f"No vote is open on {record_id}",
            details={"record_id": record_id, "now": now},
        )
    if voter in dispute.votes:
        raise_protocol_error(
            code="ALREADY_VOTED",
            message=f"{voter} already voted on {record_id}",
            details={"record_id": record_id, "voter": voter},
        )

    dispute.votes[voter] = VoteChoice(choice)
    logger.debug(f"{voter} voted {choice} on {record_id}")
    return listing


def resolve(tcr: TcrState, ledger: Ledger, record_id: str, now: int) -> list[Payout]:
    """
    Settle a listing whose delay or vote period has elapsed.

    Unchallenged proposals are listed and the stake returned. A challenge
    that fails (ties included) pays the dispute stake to the proposer
    (half, rounded up) and the Include voters; a challenge that succeeds
    pays the challenger its share of the inclusion stake and the Exclude
    voters the rest. The winning side's own stake is returned.

    Args:
        tcr: Registry state
        ledger: Ledger holding the escrows
        record_id: Listing to settle
        now: Current tick

    Returns:
        Every credit made, stake returns included, in payment order

    Raises:
        ProtocolError: UNKNOWN_LISTING, ALREADY_RESOLVED or NOT_DUE
    """
    listing = get_listing(tcr, record_id)
    if listing.state in TERMINAL_STATES:
        raise_protocol_error(
            code="ALREADY_RESOLVED",
            message=f"Record {record_id} is already {listing.state}",
            details={"record_id": record_id, "state": listing.state},
        )
    due = listing.deadline if listing.challenge is None else listing.challenge.vote_deadline
    if now < due:
        raise_protocol_error(
            code="NOT_DUE",
            message=f"Record {record_id} cannot be resolved before tick {due}",
            details={"record_id": record_id, "due": due, "now": now},
        )

    inclusion_escrow = listing.inclusion_escrow
    inclusion = ledger_service.escrow_amount(ledger, inclusion_escrow) if inclusion_escrow else 0
    inclusion_return = [(listing.proposer, inclusion)]

    # Unchallenged
    if listing.challenge is None:
        if inclusion_escrow:
            ledger_service.escrow_release(ledger, inclusion_escrow, inclusion_return)
        _list(listing, now, weight=0)
        return [Payout(account=listing.proposer, amount=inclusion)]

    dispute = listing.challenge
    includers = [v for v, c in dispute.votes.items() if c == VoteChoice.INCLUDE]
    excluders = [v for v, c in dispute.votes.items() if c == VoteChoice.EXCLUDE]
    dispute_amount = ledger_service.escrow_amount(ledger, dispute.dispute_escrow)

    if len(includers) >= len(excluders):
        # Failed challenge: dispute stake to the proposer and Include voters
        contributor_share = dispute_amount if not includers else (dispute_amount + 1) // 2
        payouts = [(listing.proposer, contributor_share)]
        if includers:
            shares = equal_split(dispute_amount - contributor_share, len(includers))
            payouts.extend(zip(includers, shares, strict=True))
        ledger_service.escrow_release(ledger, dispute.dispute_escrow, payouts)
        if inclusion_escrow:
            ledger_service.escrow_release(ledger, inclusion_escrow, inclusion_return)
        _list(listing, now, weight=len(includers))
        logger.info(
            f"Challenge on {record_id} failed ({len(includers)} include / "
            f"{len(excluders)} exclude); listed"
        )
        return [Payout(account=a, amount=x) for a, x in payouts + inclusion_return]

    # Successful challenge: inclusion stake to the challenger and Exclude voters
    challenger_share = floor_fraction(inclusion, tcr.params.challenger_share)
    shares = equal_split(inclusion - challenger_share, len(excluders))
    payouts = [(dispute.challenger, challenger_share), *zip(excluders, shares, strict=True)]
    dispute_return = [(dispute.challenger, dispute_amount)]
    if inclusion_escrow:
        ledger_service.escrow_release(ledger, inclusion_escrow, payouts)
    ledger_service.escrow_release(ledger, dispute.dispute_escrow, dispute_return)
    listing.state = ListingState.REJECTED
    logger.info(
        f"Challenge on {record_id} succeeded ({len(includers)} include / "
        f"{len(excluders)} exclude); rejected"
    )
    return [Payout(account=a, amount=x) for a, x in payouts + dispute_return]


def is_canonical(tcr: TcrState, record_id: str, now: int) -> bool:
    """Listed, or pending past its delay deadline without a challenge."""
    listing = tcr.listings.get(record_id)
    if listing is None:
        return False
    if listing.state == ListingState.LISTED:
        return True
    return (
        listing.state == ListingState.PENDING
        and listing.challenge is None
        and now >= listing.deadline
    )


def _list(listing: TcrListing, now: int, weight: int) -> None:
    listing.state = ListingState.LISTED
    listing.listed_at = now
    listing.weight = weight
    logger.info(f"Record {listing.record_id} listed (weight={weight})")


def _require_bonded(tcr: TcrState, account: str) -> None:
    if account not in tcr.bonds:
        raise_protocol_error(
            code="NOT_BONDED",
            message=f"{account} is not a bonded prover",
            details={"account": account},
        )
