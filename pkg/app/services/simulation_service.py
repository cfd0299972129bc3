"""Deterministic scenario engine: clock, dispatch, settlement and replay."""

import logging
from collections.abc import Callable, Sequence
from fractions import Fraction

from app.config import settings
from app.models.incentive import HalvingSeries
from app.models.world import World
from app.schemas.common import (
    DivergenceDetected,
    InvariantViolation,
    ProtocolError,
    raise_protocol_error,
)
from app.schemas.incentive import AllocationPolicy
from app.schemas.record import RightKind, RightToUse
from app.schemas.scenario import EventAction, EventLogEntry, Scenario, ScenarioEvent
from app.schemas.tcr import TcrParams
from app.services import (
    agent_service,
    client_service,
    content_store,
    dot_export,
    incentive_service,
    ledger_service,
    tcr_service,
)
from app.utils.scenario_parser import expand_blob, parse_kv, parse_pairs, split_csv

logger = logging.getLogger(__name__)

EventLog = list[EventLogEntry]
Handler = Callable[[World, ScenarioEvent, EventLog], str]

TRUE_WORDS = frozenset({"yes", "true", "on", "1"})


def new_world() -> World:
    """Empty world with the configured default TCR parameters."""
    return World()


def run(scenario: Scenario, world: World | None = None) -> tuple[World, EventLog]:
    """
    Apply every scenario event in order.

    Per-event protocol errors are logged as failed outcomes. After each
    event live mechanisms are settled and token conservation is checked.

    Args:
        scenario: Parsed scenario
        world: Starting state (default: a new world)

    Returns:
        Final world state and the append-only event log

    Raises:
        InvariantViolation: If conservation breaks
    """
    world = world or new_world()
    log: EventLog = []
    for event in scenario.events:
        apply(world, event, log)
    logger.info(f"Scenario {scenario.name}: {len(log)} log entries, final tick {world.tick}")
    return world, log


def apply(world: World, event: ScenarioEvent, log: EventLog) -> None:
    """Run one primary event and everything it triggers, appending to the log."""
    if event.at < world.tick:
        raise_protocol_error(
            code="CLOCK_REGRESSION",
            message=f"Event at tick {event.at} arrives after tick {world.tick}",
            details={"tick": event.at, "now": world.tick},
        )
    world.tick = event.at

    derived: EventLog = []
    try:
        detail = HANDLERS[event.action](world, event, derived)
        outcome = "ok"
    except InvariantViolation:
        raise
    except ProtocolError as e:
        detail, outcome = f"{e.code}: {e.message}", "failed"
        logger.warning(f"tick {event.at} {event.actor} {event.action} failed: {e.code}")

    log.append(
        EventLogEntry(
            tick=event.at,
            actor=event.actor,
            action=event.action.value,
            args=event.args,
            outcome=outcome,
            detail=detail,
        )
    )
    log.extend(derived)
    log.extend(settle_mechanisms(world))
    ledger_service.check_conservation(world.ledger)


def settle_mechanisms(world: World) -> EventLog:
    """Pay newly eligible proofs on live halving series, logging awards and closures."""
    live = {
        m.mechanism_id
        for m in world.mechanisms.values()
        if isinstance(m, HalvingSeries) and not m.closed
    }
    entries = [
        _derived(world, award.mechanism_id, "award", (award.tree_key,), _payout_text(award.payouts))
        for award in incentive_service.settle_mechanisms(world)
    ]
    for mechanism_id in sorted(live):
        if world.mechanisms[mechanism_id].closed:
            entries.append(_derived(world, mechanism_id, "close", (), "series closed"))
    return entries


def step_agent(world: World, agent: str, log: EventLog) -> str:
    """Step one agent; a human's directive runs as a derived event."""
    result = agent_service.step_agent(world, agent)
    log.extend(result.entries)
    if result.directive is None:
        return f"{agent}: {len(result.entries)} attempts"

    directive = result.directive
    try:
        detail = HANDLERS[directive.action](world, directive, log)
        outcome = "ok"
    except InvariantViolation:
        raise
    except ProtocolError as e:
        detail, outcome = f"{e.code}: {e.message}", "failed"
    log.append(
        EventLogEntry(
            tick=world.tick,
            actor=directive.actor,
            action=directive.action.value,
            args=directive.args,
            outcome=outcome,
            detail=detail,
            derived=True,
        )
    )
    return f"{agent}: ran {directive.action.value}"


def replay(log: Sequence[EventLogEntry]) -> World:
    """
    Rebuild a world from the primary entries of a log.

    Derived entries are regenerated, and the whole regenerated log must
    match the recorded one entry for entry.

    Raises:
        DivergenceDetected: On the first entry that differs
    """
    world = new_world()
    regenerated: EventLog = []
    primaries = [entry for entry in log if not entry.derived]
    for index, entry in enumerate(primaries):
        event = ScenarioEvent(
            at=entry.tick,
            index=index,
            actor=entry.actor,
            action=EventAction(entry.action),
            args=entry.args,
        )
        apply(world, event, regenerated)

    for position, (recorded, replayed) in enumerate(zip(log, regenerated, strict=False)):
        if recorded != replayed:
            raise DivergenceDetected(
                code="DIVERGENCE_DETECTED",
                message=f"Log entry {position} differs on replay",
                details={
                    "position": position,
                    "recorded": recorded.model_dump(mode="json"),
                    "replayed": replayed.model_dump(mode="json"),
                },
            )
    if len(log) != len(regenerated):
        raise DivergenceDetected(
            code="DIVERGENCE_DETECTED",
            message=f"Replay produced {len(regenerated)} entries, log has {len(log)}",
            details={"recorded": len(log), "replayed": len(regenerated)},
        )
    return world


def _derived(
    world: World,
    actor: str,
    action: str,
    args: tuple[str, ...],
    detail: str,
) -> EventLogEntry:
    return EventLogEntry(
        tick=world.tick,
        actor=actor,
        action=action,
        args=args,
        outcome="ok",
        detail=detail,
        derived=True,
    )


def _payout_text(payouts: Sequence) -> str:
    return ", ".join(f"{p.account}+{p.amount}" for p in payouts) or "nothing paid"


def _kv(event: ScenarioEvent, position: int) -> dict[str, str]:
    return parse_kv(event.arg(position))


def _int(value: str, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise_protocol_error(
            code="BAD_ARGUMENT",
            message=f"{name} must be an integer, got {value!r}",
            details={"argument": name, "value": value},
        )


def _required(pairs: dict[str, str], key: str) -> str:
    if not pairs.get(key):
        raise_protocol_error(
            code="BAD_ARGUMENT",
            message=f"Missing {key}=",
            details={"argument": key},
        )
    return pairs[key]


# Handlers: each returns the log detail or raises ProtocolError


def _configure(world: World, event: ScenarioEvent, log: EventLog) -> str:
    pairs = parse_kv(" ".join(event.args))
    current = world.tcr.params
    try:
        share = Fraction(pairs.get("challenger_share", str(current.challenger_share)))
        params = TcrParams(
            min_bond=int(pairs.get("min_bond", current.min_bond)),
            inclusion_stake=int(pairs.get("inclusion_stake", current.inclusion_stake)),
            dispute_stake=int(pairs.get("dispute_stake", current.dispute_stake)),
            delay_period=int(pairs.get("delay_period", current.delay_period)),
            vote_period=int(pairs.get("vote_period", current.vote_period)),
            challenger_share_num=share.numerator,
            challenger_share_denom=share.denominator,
        )
    except (ValueError, ZeroDivisionError) as e:
        raise_protocol_error("BAD_ARGUMENT", f"Invalid TCR parameters: {e}")
    world.tcr.params = params
    return (
        f"min_bond={params.min_bond} inclusion_stake={params.inclusion_stake} "
        f"dispute_stake={params.dispute_stake} delay_period={params.delay_period} "
        f"vote_period={params.vote_period} challenger_share={params.challenger_share}"
    )


def _genesis(world: World, event: ScenarioEvent, log: EventLog) -> str:
    if world.ledger.total_supply or world.ledger.balances:
        raise_protocol_error("GENESIS_DONE", "Genesis already ran in this world")
    pairs = parse_pairs(" ".join(event.args))
    allocations = [(account, _int(amount, account)) for account, amount in pairs]
    world.ledger = ledger_service.genesis(allocations)
    return f"total_supply={world.ledger.total_supply}"


def _bootstrap(world: World, event: ScenarioEvent, log: EventLog) -> str:
    record_id = event.arg(0)
    blob = expand_blob(event.arg(1), world.labels)
    result = client_service.bootstrap(world, event.actor, record_id, blob)
    return f"{record_id} -> {result.address[:12]}; {result.detail}"


def _put(world: World, event: ScenarioEvent, log: EventLog) -> str:
    label = event.arg(0)
    if not label:
        raise_protocol_error("BAD_ARGUMENT", "put needs a label")
    address = client_service.publish(world, label, expand_blob(event.arg(1), world.labels))
    return f"{label} -> {address[:12]}"


def _parse_right(text: str) -> RightToUse:
    if text in ("", "free", RightKind.FREE_TO_USE.value):
        return RightToUse()
    if text in ("restricted", RightKind.RESTRICTED_TO_USE.value):
        return RightToUse(kind=RightKind.RESTRICTED_TO_USE)
    kind, _, rest = text.partition(":")
    if kind != RightKind.PAY_TO_USE.value:
        raise_protocol_error("BAD_ARGUMENT", f"Unknown right {text!r}", {"right": text})
    fee, _, beneficiary = rest.partition(":")
    try:
        return RightToUse(
            kind=RightKind.PAY_TO_USE,
            fee=_int(fee, "fee"),
            beneficiary=beneficiary or None,
        )
    except ValueError as e:
        raise_protocol_error("BAD_ARGUMENT", f"Invalid right {text!r}: {e}", {"right": text})


def _submit(world: World, event: ScenarioEvent, log: EventLog) -> str:
    record_id = event.arg(0)
    pairs = _kv(event, 1)
    address = client_service.resolve_address(world, pairs.get("file", record_id))
    result = client_service.submit(
        world,
        event.actor,
        record_id,
        address,
        filetype=pairs.get("filetype"),
        right_to_use=_parse_right(pairs.get("right", "")),
        coq_ver=pairs.get("coq"),
    )
    return result.detail


def _propose(world: World, event: ScenarioEvent, log: EventLog) -> str:
    listing = tcr_service.propose(
        world.tcr, world.ledger, world.registry, event.arg(0), event.actor, world.tick
    )
    return f"pending until {listing.deadline}"


def _bond(world: World, event: ScenarioEvent, log: EventLog) -> str:
    bond = tcr_service.bond(world.tcr, world.ledger, event.actor, _int(event.arg(0), "amount"))
    return f"bonded {bond.amount}"


def _challenge(world: World, event: ScenarioEvent, log: EventLog) -> str:
    listing = tcr_service.challenge(world.tcr, world.ledger, event.arg(0), event.actor, world.tick)
    return f"vote open until {listing.challenge.vote_deadline}"


def _vote(world: World, event: ScenarioEvent, log: EventLog) -> str:
    choice = event.arg(1)
    tcr_service.vote(world.tcr, event.arg(0), event.actor, choice, world.tick)
    return f"{event.actor} voted {choice}"


def _resolve(world: World, event: ScenarioEvent, log: EventLog) -> str:
    payouts = tcr_service.resolve(world.tcr, world.ledger, event.arg(0), world.tick)
    listing = world.tcr.listings[event.arg(0)]
    return f"{listing.state} weight={listing.weight}; {_payout_text(payouts)}"


def _transfer(world: World, event: ScenarioEvent, log: EventLog) -> str:
    amount = _int(event.arg(1), "amount")
    ledger_service.transfer(world.ledger, event.actor, event.arg(0), amount)
    return f"{event.actor} -> {event.arg(0)}: {amount}"


def _policy(pairs: dict[str, str]) -> AllocationPolicy:
    try:
        return AllocationPolicy(
            kind=pairs.get("policy", "shapley"),
            scope=pairs.get("scope", "tree"),
        )
    except ValueError as e:
        raise_protocol_error("BAD_ARGUMENT", f"Invalid allocation policy: {e}")


def _deploy(world: World, event: ScenarioEvent, log: EventLog) -> str:
    mechanism_id = event.arg(0)
    pairs = _kv(event, 1)
    kind = _required(pairs, "kind")
    if kind == "fixed":
        prize = incentive_service.deploy_fixed_prize(
            world,
            mechanism_id,
            event.actor,
            target=_required(pairs, "target"),
            prize=_int(_required(pairs, "prize"), "prize"),
            signers=split_csv(pairs.get("signers", event.actor)),
            threshold=_int(pairs.get("threshold", "1"), "threshold"),
            policy=_policy(pairs),
        )
        return f"prize {prize.prize} on {prize.target}"
    if kind == "halving":
        series = incentive_service.deploy_halving(
            world,
            mechanism_id,
            event.actor,
            target=_required(pairs, "target"),
            base_prize=_int(_required(pairs, "reward"), "reward"),
            policy=_policy(pairs),
        )
        return f"halving R={series.base_prize} on {series.target}"
    if kind == "branch":
        try:
            rho = Fraction(pairs.get("rho", str(settings.branch_staker_fraction)))
        except (ValueError, ZeroDivisionError):
            raise_protocol_error("BAD_ARGUMENT", f"Invalid rho {pairs.get('rho')!r}")
        branch = incentive_service.deploy_branch(
            world,
            mechanism_id,
            event.actor,
            parent=_required(pairs, "mechanism"),
            contribution=client_service.resolve_address(world, _required(pairs, "contribution")),
            rho=rho,
        )
        return f"branch under {branch.parent} rho={branch.rho}"
    raise_protocol_error("BAD_ARGUMENT", f"Unknown mechanism kind {kind!r}", {"kind": kind})


def _approve(world: World, event: ScenarioEvent, log: EventLog) -> str:
    award = incentive_service.approve_and_award(
        world, event.arg(0), event.actor, split_csv(event.arg(1))
    )
    if award is None:
        return "approval recorded"
    return _payout_text(award.payouts)


def _stake(world: World, event: ScenarioEvent, log: EventLog) -> str:
    entry = incentive_service.stake_branch(
        world, event.arg(0), event.actor, _int(event.arg(1), "amount")
    )
    return f"staked {entry.amount}"


def _agent(world: World, event: ScenarioEvent, log: EventLog) -> str:
    pairs = _kv(event, 1)
    script = agent_service.register_agent(
        world,
        event.actor,
        event.arg(0),
        watch=split_csv(pairs.get("watch", "")),
        solvable=split_csv(pairs.get("solvable", "")),
        auto_propose=pairs.get("propose", "no").lower() in TRUE_WORDS,
    )
    return f"{script.kind} agent"


def _script(world: World, event: ScenarioEvent, log: EventLog) -> str:
    action = event.arg(0)
    if action not in {a.value for a in EventAction} or action in (
        EventAction.SCRIPT,
        EventAction.AGENT_STEP,
    ):
        raise_protocol_error("BAD_ARGUMENT", f"Cannot script {action!r}", {"action": action})
    rest = tuple(part.strip() for part in event.arg(1).split("|", 1)) if event.arg(1) else ()
    directive = ScenarioEvent(
        at=event.at,
        index=event.index,
        actor=event.actor,
        action=EventAction(action),
        args=rest,
    )
    queued = agent_service.queue_directive(world, event.actor, directive)
    return f"{queued} directives queued"


def _step(world: World, event: ScenarioEvent, log: EventLog) -> str:
    if event.actor == "*":
        names = [script.agent for script in world.agents]
        return "; ".join(step_agent(world, name, log) for name in names) or "no agents"
    return step_agent(world, event.actor, log)


def _hosted(world: World, event: ScenarioEvent, log: EventLog) -> str:
    address = client_service.resolve_address(world, event.arg(0))
    hosted = event.arg(1, "yes").lower() in TRUE_WORDS
    content_store.set_hosted(world.store, address, hosted)
    return f"hosted={hosted}"


def _snapshot(world: World, event: ScenarioEvent, log: EventLog) -> str:
    label = event.arg(0)
    if not label:
        raise_protocol_error("BAD_ARGUMENT", "snapshot needs a label")
    highlight = split_csv(_kv(event, 1).get("highlight", ""))
    world.snapshots[label] = dot_export.export_dot(world.dag, highlight=highlight)
    return f"{label}: {len(world.dag.statements)} statements"


HANDLERS: dict[EventAction, Handler] = {
    EventAction.CONFIGURE: _configure,
    EventAction.GENESIS: _genesis,
    EventAction.BOOTSTRAP: _bootstrap,
    EventAction.PUT_BLOB: _put,
    EventAction.SUBMIT_RECORD: _submit,
    EventAction.PROPOSE: _propose,
    EventAction.BOND: _bond,
    EventAction.CHALLENGE: _challenge,
    EventAction.VOTE: _vote,
    EventAction.RESOLVE: _resolve,
    EventAction.TRANSFER: _transfer,
    EventAction.DEPLOY_MECHANISM: _deploy,
    EventAction.APPROVE: _approve,
    EventAction.STAKE_BRANCH: _stake,
    EventAction.REGISTER_AGENT: _agent,
    EventAction.SCRIPT: _script,
    EventAction.AGENT_STEP: _step,
    EventAction.SET_HOSTED: _hosted,
    EventAction.SNAPSHOT: _snapshot,
}
