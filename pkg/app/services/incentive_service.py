"""Incentive contracts: fixed and multisig prizes, halving series, branch staking."""

import logging
from collections.abc import Iterable, Sequence
from fractions import Fraction

from app.config import settings
from app.models.incentive import (
    Award,
    AwardPayout,
    BranchStake,
    FixedPrize,
    HalvingSeries,
    Mechanism,
    StakeEntry,
)
from app.models.proof_dag import ProofDag, ProofTree
from app.models.world import World
from app.schemas.common import ProtocolError, raise_protocol_error
from app.schemas.incentive import AllocationPolicy, PolicyKind, PolicyScope
from app.services import ledger_service, proof_dag_service, tcr_service
from app.services.proof_dag_service import closure
from app.utils.rounding import equal_split, floor_fraction, largest_remainder
from app.utils.shapley import shapley_permutation, shapley_subset

logger = logging.getLogger(__name__)

ORACLES = {"subset": shapley_subset, "permutation": shapley_permutation}


def shapley_allocate(
    dag: ProofDag,
    justification_ids: Iterable[str],
    target: str,
    amount: int,
    oracle: str = "subset",
) -> list[tuple[str, int]]:
    """
    Split an amount by the Shapley value of the proof-completion game.

    Players are the authors of the given (non-bootstrap) justifications, in
    the order their first justification was filed. A coalition is worth 1 if
    its justifications, together with the bootstrap library, prove the
    target, else 0.

    Args:
        dag: Statement graph
        justification_ids: Justifications whose authors are the players
        target: Statement the game is about
        amount: Tokens to split
        oracle: "subset" or "permutation" enumeration

    Returns:
        (account, amount) pairs in player order, summing exactly to amount

    Raises:
        ProtocolError: TOO_MANY_PLAYERS, TARGET_UNPROVEN_BY_GRAND_COALITION
            or NO_CONTRIBUTORS
    """
    chosen = sorted(
        (dag.justifications[jid] for jid in dict.fromkeys(justification_ids)),
        key=lambda j: j.seq,
    )
    players = list(dict.fromkeys(j.author for j in chosen if not j.axiom))
    if len(players) > settings.SHAPLEY_MAX_PLAYERS:
        raise_protocol_error(
            code="TOO_MANY_PLAYERS",
            message=f"{len(players)} players exceed the exact bound {settings.SHAPLEY_MAX_PLAYERS}",
            details={"players": players},
        )

    axioms = [j for j in dag.justifications.values() if j.axiom]
    playable = [j for j in chosen if not j.axiom]

    def value(coalition: frozenset[str]) -> int:
        available = axioms + [j for j in playable if j.author in coalition]
        return 1 if target in closure(available) else 0

    if value(frozenset(players)) == 0:
        raise_protocol_error(
            code="TARGET_UNPROVEN_BY_GRAND_COALITION",
            message=f"The given justifications do not prove {target}",
            details={"target": target},
        )
    if value(frozenset()) == 1:
        raise_protocol_error(
            code="NO_CONTRIBUTORS",
            message=f"{target} follows from the bootstrap library alone",
            details={"target": target},
        )

    phi = ORACLES[oracle](players, value)
    shares = largest_remainder(amount, [phi[p] for p in players])
    return list(zip(players, shares, strict=True))


def allocate(
    dag: ProofDag,
    policy: AllocationPolicy,
    tree: ProofTree,
    amount: int,
) -> list[tuple[str, int]]:
    """
    Divide an award among a proof tree's contributors by a policy.

    Raises:
        ProtocolError: NO_CONTRIBUTORS, or any Shapley error
    """
    if policy.kind == PolicyKind.EQUAL_SPLIT:
        if not tree.contributors:
            raise_protocol_error(
                code="NO_CONTRIBUTORS",
                message=f"Proof tree {tree.key} has no contributors",
                details={"tree": tree.key},
            )
        shares = equal_split(amount, len(tree.contributors))
        return list(zip(tree.contributors, shares, strict=True))

    if policy.scope == PolicyScope.GRAPH:
        ids: list[str] = []
        for other in proof_dag_service.proof_trees(dag, tree.root):
            ids.extend(other.choices.values())
    else:
        ids = list(tree.choices.values())
    return shapley_allocate(dag, ids, tree.root, amount)


def _require_new_mechanism(world: World, mechanism_id: str) -> None:
    if mechanism_id in world.mechanisms:
        raise_protocol_error(
            code="DUPLICATE_MECHANISM",
            message=f"Mechanism {mechanism_id} already deployed",
            details={"mechanism_id": mechanism_id},
        )


def get_mechanism(world: World, mechanism_id: str) -> Mechanism:
    """
    Raises:
        ProtocolError: UNKNOWN_MECHANISM
    """
    mechanism = world.mechanisms.get(mechanism_id)
    if mechanism is None:
        raise_protocol_error(
            code="UNKNOWN_MECHANISM",
            message=f"Mechanism {mechanism_id} does not exist",
            details={"mechanism_id": mechanism_id},
        )
    return mechanism


def deploy_fixed_prize(
    world: World,
    mechanism_id: str,
    deployer: str,
    target: str,
    prize: int,
    signers: Sequence[str],
    threshold: int,
    policy: AllocationPolicy | None = None,
) -> FixedPrize:
    """
    Escrow a prize for the first approved proof of a statement.

    A single signer is the owner-decides prize; several signers with a
    threshold make it a multisig prize.

    Raises:
        ProtocolError: DUPLICATE_MECHANISM, EMPTY_SIGNERS, BAD_THRESHOLD,
            UNKNOWN_STATEMENT or INSUFFICIENT_BALANCE
    """
    _require_new_mechanism(world, mechanism_id)
    signer_set = tuple(dict.fromkeys(s for s in signers if s))
    if not signer_set:
        raise_protocol_error("EMPTY_SIGNERS", f"Prize {mechanism_id} needs at least one signer")
    if not 1 <= threshold <= len(signer_set):
        raise_protocol_error(
            code="BAD_THRESHOLD",
            message=f"Threshold {threshold} must lie in [1, {len(signer_set)}]",
            details={"threshold": threshold, "signers": list(signer_set)},
        )
    proof_dag_service.is_proven(world.dag, target)

    escrow_id = ledger_service.escrow_lock(
        world.ledger, deployer, prize, purpose=f"prize:{mechanism_id}"
    )
    mechanism = FixedPrize(
        mechanism_id=mechanism_id,
        deployer=deployer,
        target=target,
        prize=prize,
        escrow_id=escrow_id,
        signers=signer_set,
        threshold=threshold,
        policy=policy or AllocationPolicy(),
    )
    world.mechanisms[mechanism_id] = mechanism
    logger.info(
        f"{deployer} deployed prize {mechanism_id} of {prize} on {target} "
        f"({threshold}-of-{len(signer_set)})"
    )
    return mechanism


def approve_and_award(
    world: World,
    mechanism_id: str,
    signer: str,
    justification_ids: Iterable[str],
) -> Award | None:
    """
    Record a signer's approval of a proof tree; pay out once the threshold is met.

    Args:
        world: World state
        mechanism_id: Fixed prize to approve on
        signer: Approving account
        justification_ids: Justifications forming the approved tree

    Returns:
        The award if this approval released the prize, else None

    Raises:
        ProtocolError: UNKNOWN_MECHANISM, WRONG_MECHANISM, ALREADY_PAID,
            NOT_SIGNER, TREE_DOES_NOT_PROVE_TARGET, or an allocation error
            (the approval is then not recorded)
    """
    prize = get_mechanism(world, mechanism_id)
    if not isinstance(prize, FixedPrize):
        raise_protocol_error(
            code="WRONG_MECHANISM",
            message=f"{mechanism_id} is a {prize.kind} mechanism, not a prize",
            details={"mechanism_id": mechanism_id},
        )
    if prize.paid:
        raise_protocol_error(
            code="ALREADY_PAID",
            message=f"Prize {mechanism_id} was already paid",
            details={"mechanism_id": mechanism_id},
        )
    if signer not in prize.signers:
        raise_protocol_error(
            code="NOT_SIGNER",
            message=f"{signer} is not a signer of {mechanism_id}",
            details={"mechanism_id": mechanism_id, "signer": signer},
        )

    tree = proof_dag_service.tree_from_justifications(world.dag, justification_ids, prize.target)
    approvals = prize.approvals.get(tree.key, [])
    if signer not in approvals:
        approvals = [*approvals, signer]
    if len(approvals) >= prize.threshold:
        # Allocation errors surface before the approval is recorded
        allocate(world.dag, prize.policy, tree, prize.prize)
    prize.approvals[tree.key] = approvals
    logger.info(f"{signer} approved {tree.key} ({len(approvals)}/{prize.threshold})")
    if len(approvals) < prize.threshold:
        return None

    award = _pay_award(world, prize, tree, prize.prize, close_escrow=True)
    prize.winner = tree
    prize.paid = True
    _refund_branches(world, mechanism_id)
    return award


def deploy_halving(
    world: World,
    mechanism_id: str,
    deployer: str,
    target: str,
    base_prize: int,
    policy: AllocationPolicy | None = None,
) -> HalvingSeries:
    """
    Escrow 2R for a series paying R, R/2, R/4, ... to successive distinct proofs.

    Raises:
        ProtocolError: DUPLICATE_MECHANISM, INVALID_AMOUNT, UNKNOWN_STATEMENT
            or INSUFFICIENT_BALANCE
    """
    _require_new_mechanism(world, mechanism_id)
    if base_prize <= 0:
        raise_protocol_error(
            code="INVALID_AMOUNT",
            message=f"Halving series needs a positive base prize, got {base_prize}",
        )
    proof_dag_service.is_proven(world.dag, target)

    escrow_id = ledger_service.escrow_lock(
        world.ledger, deployer, 2 * base_prize, purpose=f"halving:{mechanism_id}"
    )
    series = HalvingSeries(
        mechanism_id=mechanism_id,
        deployer=deployer,
        target=target,
        base_prize=base_prize,
        escrow_id=escrow_id,
        policy=policy or AllocationPolicy(),
    )
    world.mechanisms[mechanism_id] = series
    logger.info(f"{deployer} deployed halving series {mechanism_id} (R={base_prize}) on {target}")
    return series


def register_halving(world: World, mechanism_id: str, tree: ProofTree) -> Award:
    """
    Pay the next installment of a halving series for a new distinct proof.

    The series closes, refunding its residue to the deployer, as soon as the
    next installment would be zero.

    Raises:
        ProtocolError: UNKNOWN_MECHANISM, WRONG_MECHANISM, SERIES_CLOSED,
            DUPLICATE_TREE or TREE_DOES_NOT_PROVE_TARGET
    """
    series = get_mechanism(world, mechanism_id)
    if not isinstance(series, HalvingSeries):
        raise_protocol_error(
            code="WRONG_MECHANISM",
            message=f"{mechanism_id} is not a halving series",
            details={"mechanism_id": mechanism_id},
        )
    if series.closed:
        raise_protocol_error(
            code="SERIES_CLOSED",
            message=f"Halving series {mechanism_id} is closed",
            details={"mechanism_id": mechanism_id},
        )
    if tree.key in series.registered:
        raise_protocol_error(
            code="DUPLICATE_TREE",
            message=f"Proof {tree.key} was already paid by {mechanism_id}",
            details={"mechanism_id": mechanism_id, "tree": tree.key},
        )
    if not proof_dag_service.verify_tree(world.dag, tree, series.target):
        raise_protocol_error(
            code="TREE_DOES_NOT_PROVE_TARGET",
            message=f"Proof {tree.key} does not prove {series.target}",
            details={"mechanism_id": mechanism_id, "tree": tree.key},
        )

    award = _pay_award(world, series, tree, series.next_payment, close_escrow=False)
    series.registered.append(tree.key)
    series.proofs_paid += 1
    if series.next_payment == 0:
        close_halving(world, series)
    return award


def close_halving(world: World, series: HalvingSeries) -> int:
    """Refund the residue to the deployer and release any live branch stakes."""
    residue = ledger_service.escrow_amount(world.ledger, series.escrow_id)
    ledger_service.escrow_release(world.ledger, series.escrow_id, [(series.deployer, residue)])
    series.closed = True
    _refund_branches(world, series.mechanism_id)
    logger.info(f"Halving series {series.mechanism_id} closed; refunded {residue}")
    return residue


def deploy_branch(
    world: World,
    mechanism_id: str,
    deployer: str,
    parent: str,
    contribution: str,
    rho: Fraction | str | None = None,
) -> BranchStake:
    """
    Open branch staking on a partial-progress contribution under a reward mechanism.

    Raises:
        ProtocolError: DUPLICATE_MECHANISM, UNKNOWN_MECHANISM, WRONG_MECHANISM or BAD_FRACTION
    """
    _require_new_mechanism(world, mechanism_id)
    parent_mechanism = get_mechanism(world, parent)
    if isinstance(parent_mechanism, BranchStake):
        raise_protocol_error(
            code="WRONG_MECHANISM",
            message=f"Branch stakes attach to prizes or halving series, not {parent}",
            details={"parent": parent},
        )
    fraction = settings.branch_staker_fraction if rho is None else Fraction(rho)
    if not 0 <= fraction <= 1:
        raise_protocol_error(
            code="BAD_FRACTION",
            message=f"Staker fraction {fraction} must lie in [0, 1]",
            details={"rho": str(fraction)},
        )

    branch = BranchStake(
        mechanism_id=mechanism_id,
        deployer=deployer,
        parent=parent,
        contribution=contribution,
        rho_num=fraction.numerator,
        rho_denom=fraction.denominator,
    )
    world.mechanisms[mechanism_id] = branch
    logger.info(f"Branch {mechanism_id} on {contribution[:12]} under {parent} (rho={fraction})")
    return branch


def stake_branch(world: World, mechanism_id: str, staker: str, amount: int) -> StakeEntry:
    """
    Lock tokens on a live branch.

    Raises:
        ProtocolError: UNKNOWN_MECHANISM, WRONG_MECHANISM, BRANCH_CLOSED,
            INVALID_AMOUNT or INSUFFICIENT_BALANCE
    """
    branch = get_mechanism(world, mechanism_id)
    if not isinstance(branch, BranchStake):
        raise_protocol_error(
            code="WRONG_MECHANISM",
            message=f"{mechanism_id} is not a branch stake",
            details={"mechanism_id": mechanism_id},
        )
    if branch.status != "live":
        raise_protocol_error(
            code="BRANCH_CLOSED",
            message=f"Branch {mechanism_id} is {branch.status}",
            details={"mechanism_id": mechanism_id},
        )
    if amount <= 0:
        raise_protocol_error("INVALID_AMOUNT", f"Stakes are positive, got {amount}")

    escrow_id = ledger_service.escrow_lock(
        world.ledger, staker, amount, purpose=f"branch:{mechanism_id}:{staker}"
    )
    entry = StakeEntry(staker=staker, amount=amount, escrow_id=escrow_id)
    branch.stakes.append(entry)
    logger.info(f"{staker} staked {amount} on branch {mechanism_id}")
    return entry


def settle_branch(
    world: World,
    branch: BranchStake,
    tree: ProofTree,
    reward: int,
) -> list[AwardPayout]:
    """
    Work out the stakers' share of a reward whose tree passes through the branch.

    The pool is floor(rho * reward), split pro rata by each staker's total
    stake (first stake first on remainder ties). Stakes are returned.
    Payment of the pool itself is left to the paying mechanism.

    Raises:
        ProtocolError: BRANCH_NOT_IN_TREE, leaving the branch untouched
    """
    used = {world.dag.justifications[jid].contribution for jid in tree.choices.values()}
    if branch.contribution not in used:
        raise_protocol_error(
            code="BRANCH_NOT_IN_TREE",
            message=f"Proof {tree.key} does not pass through branch {branch.mechanism_id}",
            details={"mechanism_id": branch.mechanism_id, "tree": tree.key},
        )

    totals: dict[str, int] = {}
    for entry in branch.stakes:
        totals[entry.staker] = totals.get(entry.staker, 0) + entry.amount

    payouts: list[AwardPayout] = []
    if totals:
        pool = floor_fraction(reward, branch.rho)
        shares = largest_remainder(pool, list(totals.values()))
        payouts = [
            AwardPayout(account=staker, amount=share, role="staker")
            for staker, share in zip(totals, shares, strict=True)
        ]

    _return_stakes(world, branch)
    branch.status = "settled"
    branch.paid_out = sum(p.amount for p in payouts)
    return payouts


def _return_stakes(world: World, branch: BranchStake) -> None:
    for entry in branch.stakes:
        ledger_service.escrow_release(world.ledger, entry.escrow_id, [(entry.staker, entry.amount)])


def _refund_branches(world: World, parent: str) -> None:
    for mechanism in world.mechanisms.values():
        if isinstance(mechanism, BranchStake) and mechanism.parent == parent:
            if mechanism.status == "live":
                _return_stakes(world, mechanism)
                mechanism.status = "refunded"
                logger.info(f"Branch {mechanism.mechanism_id} refunded")


def _pay_award(
    world: World,
    mechanism: FixedPrize | HalvingSeries,
    tree: ProofTree,
    amount: int,
    close_escrow: bool,
) -> Award:
    used = {world.dag.justifications[jid].contribution for jid in tree.choices.values()}
    branches = [
        b
        for b in world.mechanisms.values()
        if isinstance(b, BranchStake)
        and b.parent == mechanism.mechanism_id
        and b.status == "live"
        and b.contribution in used
    ]

    # Contributors' shares are computed before anything moves
    remaining = amount
    for branch in branches:
        if branch.stakes:
            remaining -= floor_fraction(remaining, branch.rho)
    contributor_shares = allocate(world.dag, mechanism.policy, tree, remaining)

    staker_payouts: list[AwardPayout] = []
    reward = amount
    for branch in branches:
        staker_payouts.extend(settle_branch(world, branch, tree, reward))
        reward -= branch.paid_out

    payouts = staker_payouts + [
        AwardPayout(account=account, amount=share) for account, share in contributor_shares
    ]
    pairs = [(p.account, p.amount) for p in payouts]
    if close_escrow:
        ledger_service.escrow_release(world.ledger, mechanism.escrow_id, pairs)
    else:
        ledger_service.escrow_disburse(world.ledger, mechanism.escrow_id, pairs)

    award = Award(
        mechanism_id=mechanism.mechanism_id,
        tree_key=tree.key,
        tick=world.tick,
        amount=amount,
        payouts=payouts,
    )
    mechanism.awards.append(award)
    logger.info(
        f"{mechanism.mechanism_id} paid {amount} for {tree.key}: "
        + ", ".join(f"{p.account}+{p.amount}" for p in payouts)
    )
    return award


def settle_mechanisms(world: World) -> list[Award]:
    """
    Register every newly eligible proof tree on every live halving series.

    A tree is eligible once its completing record, the last of its
    justifications to be ingested, is canonical in the registry.
    Failures to allocate are logged and the tree is retried later.

    Returns:
        Awards made, in mechanism then tree order
    """
    awards: list[Award] = []
    for mechanism in list(world.mechanisms.values()):
        if not isinstance(mechanism, HalvingSeries) or mechanism.closed:
            continue
        for tree in proof_dag_service.proof_trees(world.dag, mechanism.target):
            if mechanism.closed:
                break
            if tree.key in mechanism.registered:
                continue
            completing = max(
                tree.choices.values(), key=lambda jid: world.dag.justifications[jid].seq
            )
            if not tcr_service.is_canonical(world.tcr, completing, world.tick):
                continue
            try:
                awards.append(register_halving(world, mechanism.mechanism_id, tree))
            except ProtocolError as e:
                logger.warning(f"{mechanism.mechanism_id} could not pay {tree.key}: {e.code}")
    return awards
