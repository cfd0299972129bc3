"""Build and serialize run reports."""

from app.models.incentive import BranchStake, FixedPrize, HalvingSeries
from app.models.world import World
from app.schemas.report import (
    LicenseReport,
    ListingReport,
    MechanismReport,
    ProofReport,
    RunReport,
    TcrParamsReport,
    TreePayoutReport,
    TreeReport,
)
from app.schemas.scenario import EventLogEntry
from app.services import ledger_service, proof_dag_service


def build_report(name: str, world: World, log: list[EventLogEntry]) -> RunReport:
    """
    Summarize a finished run.

    Balances are sorted by account, listings and mechanisms keep creation
    order, and proofs follow the order statements were conjectured.
    """
    params = world.tcr.params
    awards = [
        (m.mechanism_id, m.target, award)
        for m in world.mechanisms.values()
        if isinstance(m, FixedPrize | HalvingSeries)
        for award in m.awards
    ]

    proofs = []
    for target in world.dag.conjectures:
        trees = []
        for tree in proof_dag_service.proof_trees(world.dag, target):
            payouts = [
                TreePayoutReport(
                    mechanism=mechanism_id,
                    account=p.account,
                    amount=p.amount,
                    role=p.role,
                )
                for mechanism_id, mechanism_target, award in awards
                if mechanism_target == target and award.tree_key == tree.key
                for p in award.payouts
            ]
            trees.append(
                TreeReport(
                    justifications=sorted(tree.choices.values()),
                    contributors=list(tree.contributors),
                    payouts=payouts,
                )
            )
        proofs.append(
            ProofReport(
                target=target,
                proven=proof_dag_service.is_proven(world.dag, target),
                trees=trees,
            )
        )

    return RunReport(
        scenario=name,
        final_tick=world.tick,
        event_count=len(log),
        total_supply=world.ledger.total_supply,
        escrowed=ledger_service.total_escrowed(world.ledger),
        tcr_params=TcrParamsReport(
            min_bond=params.min_bond,
            inclusion_stake=params.inclusion_stake,
            dispute_stake=params.dispute_stake,
            delay_period=params.delay_period,
            vote_period=params.vote_period,
            challenger_share=str(params.challenger_share),
        ),
        balances=dict(sorted(world.ledger.balances.items())),
        listings=[
            ListingReport(record_id=listing.record_id, state=listing.state, weight=listing.weight)
            for listing in world.tcr.listings.values()
        ],
        proofs=proofs,
        mechanisms=[_mechanism_report(m) for m in world.mechanisms.values()],
        licensing=[
            LicenseReport(
                record_id=charge.record_id,
                importer=charge.importer,
                beneficiary=charge.beneficiary,
                fee=charge.fee,
                tick=charge.tick,
            )
            for charge in world.licenses.charges
        ],
        duplicates=dict(world.dag.duplicates),
    )


def _mechanism_report(mechanism: FixedPrize | HalvingSeries | BranchStake) -> MechanismReport:
    if isinstance(mechanism, BranchStake):
        return MechanismReport(
            mechanism_id=mechanism.mechanism_id,
            kind=mechanism.kind,
            status=mechanism.status,
            paid_out=mechanism.paid_out,
        )
    if isinstance(mechanism, FixedPrize):
        status = "paid" if mechanism.paid else "open"
    else:
        status = "closed" if mechanism.closed else "open"
    return MechanismReport(
        mechanism_id=mechanism.mechanism_id,
        kind=mechanism.kind,
        target=mechanism.target,
        status=status,
        paid_out=sum(award.amount for award in mechanism.awards),
    )


def render_report(report: RunReport) -> str:
    """Stable JSON text of a report, ending with a newline."""
    return report.model_dump_json(indent=2) + "\n"
